"""HTTP session API exposing trained agents to human users.

Endpoints (JSON):
  POST /sessions                 -> {session_id, goal, schema}
  POST /sessions/{id}/turns      {user_act} -> {agent_act, subgoal_event?,
                                               done, outcome?}
  POST /sessions/{id}/rating     {rating: 1..5} -> 204
  GET  /sessions/{id}            -> session record; agent identity only
                                    once the dialogue is done
  GET  /healthz                  -> 200

Each session is assigned a uniformly random agent from the pool; the
client is not told which until the dialogue ends. Turn handling is
serialized per session; the model parameters behind the actors are shared
immutable snapshots. Events append to a JSON Lines log when one is
configured.
"""

import json
import random
import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from ..sim.goals import sample_goal
from .runtime import (BadAct, HumanSession, SessionDone, act_schema,
                      parse_user_act)


class TurnBody(BaseModel):
    user_act: dict


class RatingBody(BaseModel):
    rating: int = Field(ge=1, le=5)


def create_app(factories, kb, turn_cap=60, log_path=None, seed=None):
    app = FastAPI(title="dialogue session service")
    sessions = {}
    registry_lock = threading.Lock()
    chooser = random.Random(seed)
    log_lock = threading.Lock()

    def log(payload):
        if log_path is None:
            return
        with log_lock:
            with open(log_path, "a") as fh:
                fh.write(json.dumps(payload, sort_keys=True) + "\n")

    def get_session(sid):
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, {"error": "unknown_session"})
        return session

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def start_session():
        with registry_lock:
            sid = uuid.uuid4().hex[:16]
            factory = chooser.choice(factories)
            goal_rng = np.random.default_rng(chooser.getrandbits(63))
        goal = sample_goal(kb, goal_rng)
        session = HumanSession(sid, goal, kb, factory.new_actor(),
                               factory.name, turn_cap=turn_cap,
                               config_hash=factory.spec.get("config"))
        with registry_lock:
            sessions[sid] = session
        log({"event": "session_start", "session_id": sid,
             "agent": factory.name, "goal": goal.to_json(),
             "config": session.config_hash})
        return {"session_id": sid, "goal": goal.to_json(),
                "schema": act_schema()}

    @app.post("/sessions/{sid}/turns")
    def post_turn(sid: str, body: TurnBody):
        session = get_session(sid)
        try:
            act = parse_user_act(body.user_act)
        except BadAct as exc:
            raise HTTPException(400, {"error": "bad_act",
                                      "detail": str(exc)})
        with session.lock:
            try:
                agent_act, event = session.turn(act)
            except SessionDone:
                raise HTTPException(409, {"error": "session_done"})
            response = {
                "agent_act": None if agent_act is None else agent_act.to_json(),
                "done": session.done,
            }
            if event is not None:
                response["subgoal_event"] = event
            if session.done:
                response["outcome"] = session.outcome
            log({"event": "turn", "session_id": sid,
                 "user_act": act.to_json(), "agent_act": response["agent_act"],
                 "subgoal_event": event, "done": session.done,
                 "outcome": session.outcome, "config": session.config_hash})
        return response

    @app.post("/sessions/{sid}/rating", status_code=204)
    def post_rating(sid: str, body: RatingBody):
        session = get_session(sid)
        with session.lock:
            if not session.done:
                raise HTTPException(409, {"error": "session_not_done"})
            if session.rating is not None:
                raise HTTPException(409, {"error": "already_rated"})
            session.rating = body.rating
            log({"event": "rating", "session_id": sid, "rating": body.rating,
                 "config": session.config_hash})
        return Response(status_code=204)

    @app.get("/sessions/{sid}")
    def get_record(sid: str):
        session = get_session(sid)
        with session.lock:
            return session.record()

    return app
