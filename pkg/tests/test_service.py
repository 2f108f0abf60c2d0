"""Session service: act parsing, session flow, HTTP protocol."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from sgrl.dialog.featurizer import WIDTH
from sgrl.dialog.kb import generate_kb, save_kb
from sgrl.dialog.schema import NUM_ACTIONS, USER, DialogueAct
from sgrl.hrl.nets import QMlp
from sgrl.service.app import create_app
from sgrl.service.runtime import (AgentFactory, BadAct, HumanSession,
                                  act_schema, load_pool, parse_user_act,
                                  pool_kb)
from sgrl.sim.goals import sample_goal


def _kb():
    return generate_kb(7, n_flights=60, n_hotels=40)


def _checkpoint(tmp_path, name="rl_run0"):
    """Minimal flat-agent checkpoint directory plus a kb file."""
    root = tmp_path / "artifacts"
    root.mkdir(exist_ok=True)
    kb_path = root / "kb.json"
    if not kb_path.exists():
        save_kb(_kb(), kb_path)
    ckpt = root / "checkpoints" / name
    ckpt.mkdir(parents=True)
    net = QMlp(WIDTH, NUM_ACTIONS, hidden=8, seed=3)
    net.save(ckpt / "flat.npz", "FLATQ")
    (ckpt / "agent.json").write_text(json.dumps(
        {"agent": "rl", "kind": "rl", "run": 0, "seed": 3,
         "kb": "../../kb.json"}))
    return ckpt


def test_act_schema_shape():
    schema = act_schema()
    assert "inform" in schema["user_acts"]
    assert "price" not in schema["informable"]
    assert "price" in schema["requestable"]
    assert schema["subtasks"] == ["flight", "hotel"]


def test_parse_user_act():
    act = parse_user_act({"act": "inform", "slots": {"or_city": "Lima"}})
    assert act.speaker == USER
    for bad in ({"act": "inform", "slots": {"bogus": "x"}},
                {"act": "perform", "slots": {}},
                {"speaker": "agent", "act": "inform", "slots": {}},
                "not an object",
                {"act": "confirm", "slots": {"subtask": "cruise"}}):
        with pytest.raises(BadAct):
            parse_user_act(bad)


def _scripted_session(kb, actor):
    goal = sample_goal(kb, np.random.default_rng(5))
    return HumanSession("s1", goal, kb, actor, "rl", turn_cap=60,
                        config_hash="abc")


class _EchoActor:
    """Always requests the first slot; lets tests drive the session."""

    def start(self, vec):
        self.started = True

    def on_line(self, vec, turn):
        return None

    def select(self, state, vec):
        return 0


def test_session_turns_and_record():
    kb = _kb()
    sess = _scripted_session(kb, _EchoActor())
    act, event = sess.turn(DialogueAct(USER, "inform", {"or_city": "Lima"}))
    assert act is not None and act.speaker == "agent"
    assert event is None
    rec = sess.record()
    assert rec["status"] == "active"
    assert rec["agent"] is None             # identity blinded while active
    assert len(rec["transcript"]) == 2
    act, _ = sess.turn(DialogueAct(USER, "closing", {}))
    assert act is None
    assert sess.done
    rec = sess.record()
    assert rec["status"] == "done"
    assert rec["agent"] == "rl"
    assert rec["outcome"]["reason"] == "user_end"
    with pytest.raises(Exception):
        sess.turn(DialogueAct(USER, "thanks", {}))


def test_factory_and_pool_loading(tmp_path):
    ckpt = _checkpoint(tmp_path)
    pool = load_pool([str(ckpt)])
    assert pool[0].kind == "rl"
    actor = pool[0].new_actor()
    assert actor.select(None, np.zeros(WIDTH)) in range(NUM_ACTIONS)
    kb = pool_kb([str(ckpt)])
    assert len(kb.flights) == 60


def _client(tmp_path, log_path=None):
    ckpt = _checkpoint(tmp_path)
    pool = load_pool([str(ckpt)])
    kb = pool_kb([str(ckpt)])
    app = create_app(pool, kb, turn_cap=60, log_path=log_path, seed=0)
    return TestClient(app)


def test_http_session_lifecycle(tmp_path):
    client = _client(tmp_path)
    assert client.get("/healthz").json() == {"status": "ok"}

    created = client.post("/sessions")
    assert created.status_code == 200
    body = created.json()
    sid = body["session_id"]
    assert "flight" in body["goal"]
    assert body["schema"]["user_acts"]

    r = client.post("/sessions/%s/turns" % sid, json={
        "user_act": {"act": "inform", "slots": {"or_city": "Lima"}}})
    assert r.status_code == 200
    turn = r.json()
    assert turn["agent_act"]["speaker"] == "agent"
    assert turn["done"] is False

    r = client.post("/sessions/%s/turns" % sid, json={
        "user_act": {"act": "inform", "slots": {"nope": "x"}}})
    assert r.status_code == 400

    r = client.post("/sessions/missing/turns", json={
        "user_act": {"act": "thanks", "slots": {}}})
    assert r.status_code == 404

    # rating before the session is done is a conflict
    assert client.post("/sessions/%s/rating" % sid,
                       json={"rating": 4}).status_code == 409

    r = client.post("/sessions/%s/turns" % sid, json={
        "user_act": {"act": "closing", "slots": {}}})
    assert r.status_code == 200
    assert r.json()["done"] is True
    assert r.json()["outcome"]["reason"] == "user_end"

    # turns after completion conflict
    r = client.post("/sessions/%s/turns" % sid, json={
        "user_act": {"act": "thanks", "slots": {}}})
    assert r.status_code == 409

    assert client.post("/sessions/%s/rating" % sid,
                       json={"rating": 7}).status_code == 422
    assert client.post("/sessions/%s/rating" % sid,
                       json={"rating": 4}).status_code == 204
    assert client.post("/sessions/%s/rating" % sid,
                       json={"rating": 4}).status_code == 409

    rec = client.get("/sessions/%s" % sid).json()
    assert rec["status"] == "done"
    assert rec["rating"] == 4
    assert rec["agent"] == "rl"
    assert len(rec["transcript"]) == 3      # two user acts, one agent reply


def test_http_session_log(tmp_path):
    log = tmp_path / "sessions.jsonl"
    client = _client(tmp_path, log_path=str(log))
    sid = client.post("/sessions").json()["session_id"]
    client.post("/sessions/%s/turns" % sid, json={
        "user_act": {"act": "closing", "slots": {}}})
    client.post("/sessions/%s/rating" % sid, json={"rating": 5})
    lines = [json.loads(l) for l in log.read_text().splitlines()]
    kinds = [l["event"] for l in lines]
    assert kinds == ["session_start", "turn", "rating"]
    assert all(l["session_id"] == sid for l in lines)


def test_sessions_are_isolated(tmp_path):
    client = _client(tmp_path)
    a = client.post("/sessions").json()["session_id"]
    b = client.post("/sessions").json()["session_id"]
    assert a != b
    client.post("/sessions/%s/turns" % a, json={
        "user_act": {"act": "inform", "slots": {"or_city": "Lima"}}})
    rec_b = client.get("/sessions/%s" % b).json()
    assert rec_b["transcript"] == []
