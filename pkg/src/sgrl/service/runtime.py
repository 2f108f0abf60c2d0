"""Dialogue sessions driven by a human user over HTTP.

The simulator's exchange loop is rebuilt here with the human in the user
seat: each turn the client posts one user act, the tracker absorbs it, the
served policy answers, and the tracker absorbs the reply. Termination and
the success check are the environment's own rules, minus patience (humans
hang up when they feel like it).

Every session gets a private actor: the Q-nets and the subgoal model are
shared read-only snapshots, while per-session mutable state (the current
option, the termination stream) lives in the actor, so concurrent sessions
cannot interfere.
"""

import json
import os
import threading

import numpy as np

from ..dialog.featurizer import featurize
from ..dialog.schema import (ALL_SLOTS, ANY_VALUE, KB_ONLY_SLOTS, SLOT_TYPES,
                             SUBTASKS, USER, DialogueAct)
from ..dialog.kb import load_kb
from ..dialog.tracker import DialogueTracker
from ..hrl.nets import QMlp, goal_input
from ..sim.env import resolve_action
from ..sim.user import dialogue_success
from ..subgoal.estimator import SubgoalDiscoveryNetwork
from ..subgoal.stream import TerminationStream

USER_ACTS = ("inform", "request", "confirm", "book", "deny", "thanks",
             "closing")


def act_schema():
    """What the client may compose: act types and the slot inventory."""
    return {
        "user_acts": list(USER_ACTS),
        "informable": [s for s in ALL_SLOTS if s not in KB_ONLY_SLOTS],
        "requestable": list(ALL_SLOTS),
        "subtasks": list(SUBTASKS),
        "slot_types": dict(SLOT_TYPES),
        "any_value": ANY_VALUE,
    }


class BadAct(ValueError):
    pass


def parse_user_act(obj):
    if not isinstance(obj, dict):
        raise BadAct("user_act must be an object")
    if obj.get("speaker", USER) != USER:
        raise BadAct("only user acts are accepted")
    if obj.get("act") not in USER_ACTS:
        raise BadAct("act must be one of %s" % (USER_ACTS,))
    try:
        return DialogueAct(USER, obj["act"], dict(obj.get("slots", {})))
    except (ValueError, TypeError, KeyError) as exc:
        raise BadAct(str(exc))


# -- per-session actors -----------------------------------------------------

class FlatActor:
    def __init__(self, net):
        self.net = net

    def start(self, vec):
        pass

    def on_line(self, vec, turn):
        return None

    def select(self, state, vec):
        return int(np.argmax(self.net.values(vec)))


class SubtaskActor:
    def __init__(self, top, low):
        self.top = top
        self.low = low
        self.goal = None

    def start(self, vec):
        pass

    def on_line(self, vec, turn):
        return None

    def select(self, state, vec):
        if self.goal is None or SUBTASKS[self.goal] in state.booked:
            avail = [i for i, name in enumerate(SUBTASKS)
                     if name not in state.booked]
            if not avail:
                avail = list(range(len(SUBTASKS)))
            vals = self.top.values(vec)
            self.goal = int(max(avail, key=lambda i: vals[i]))
        return int(np.argmax(
            self.low.values(goal_input(vec, self.goal, len(SUBTASKS)))))


class DiscoveredActor:
    def __init__(self, top, low, model, threshold, n_goals):
        self.top = top
        self.low = low
        self.stream = TerminationStream(model, threshold=threshold)
        self.n_goals = n_goals
        self.goal = None

    def start(self, vec):
        self.stream.start(vec)

    def on_line(self, vec, turn):
        p = self.stream.push(vec)
        if p < self.stream.threshold:
            return None
        symbol = self.stream.latent_label()
        self.stream.reset_segment()
        self.goal = None                  # option terminated at this line
        return {"turn": turn, "kind": "subgoal", "symbol": symbol,
                "p": round(float(p), 4)}

    def select(self, state, vec):
        if self.goal is None:
            self.goal = int(np.argmax(self.top.values(vec)))
        return int(np.argmax(
            self.low.values(goal_input(vec, self.goal, self.n_goals))))


class AgentFactory:
    """Loads one checkpointed agent and mints per-session actors."""

    def __init__(self, name, kind, spec, nets, sdn=None, threshold=0.2):
        self.name = name
        self.kind = kind
        self.spec = spec
        self.nets = nets
        self.sdn = sdn
        self.threshold = threshold

    @classmethod
    def load(cls, path):
        path = os.path.abspath(path)
        with open(os.path.join(path, "agent.json")) as fh:
            spec = json.load(fh)
        kind = spec["kind"]
        if kind == "rl":
            nets = {"flat": QMlp.load(os.path.join(path, "flat.npz"),
                                      expect_kind="FLATQ")}
            sdn = None
        else:
            nets = {"top": QMlp.load(os.path.join(path, "top.npz"),
                                     expect_kind="TOPQ"),
                    "low": QMlp.load(os.path.join(path, "low.npz"),
                                     expect_kind="LOWQ")}
            sdn = None
            if kind == "discovered":
                sdn = SubgoalDiscoveryNetwork.load(
                    os.path.join(path, spec["sdn"]))
        return cls(spec.get("agent", kind), kind, spec, nets, sdn=sdn,
                   threshold=float(spec.get("threshold", 0.2)))

    def new_actor(self):
        if self.kind == "rl":
            return FlatActor(self.nets["flat"])
        if self.kind == "subtask":
            return SubtaskActor(self.nets["top"], self.nets["low"])
        return DiscoveredActor(self.nets["top"], self.nets["low"],
                               self.sdn.model_, self.threshold,
                               self.sdn.latent_slots)


def load_pool(paths):
    factories = [AgentFactory.load(p) for p in paths]
    if not factories:
        raise ValueError("agent pool is empty")
    return factories


def pool_kb(paths):
    """The KB referenced by the first pool entry that names one."""
    for p in paths:
        with open(os.path.join(p, "agent.json")) as fh:
            spec = json.load(fh)
        if spec.get("kb"):
            return load_kb(os.path.join(os.path.abspath(p), spec["kb"]))
    raise ValueError("no pool entry references a knowledge base")


# -- the session ------------------------------------------------------------

class SessionDone(RuntimeError):
    pass


class HumanSession:
    def __init__(self, session_id, goal, kb, actor, agent_name, turn_cap=60,
                 config_hash=None):
        self.session_id = session_id
        self.goal = goal
        self.kb = kb
        self.actor = actor
        self.agent_name = agent_name
        self.turn_cap = turn_cap
        self.config_hash = config_hash
        self.tracker = DialogueTracker(kb)
        self.state = self.tracker.fresh()
        self.lines = 0
        self.done = False
        self.outcome = None
        self.rating = None
        self.transcript = []
        self.events = []
        self.lock = threading.Lock()
        actor.start(featurize(self.state, turn_cap))

    def _absorb(self, act):
        self.state = self.tracker.track(self.state, act)
        self.lines += 1
        self.transcript.append(act)
        event = self.actor.on_line(featurize(self.state, self.turn_cap),
                                   self.lines)
        if event is not None:
            self.events.append(event)
        return event

    def _finish(self, reason):
        self.done = True
        success = dialogue_success(self.state, self.goal, self.kb,
                                   self.lines, self.turn_cap)
        self.outcome = {"success": bool(success), "reason": reason}

    def turn(self, user_act):
        """One exchange: absorb the user act, answer unless it ended things.

        Returns (agent_act or None, subgoal event or None). Caller holds
        the session lock.
        """
        if self.done:
            raise SessionDone("session already finished")
        agent_was_booking = self.state.last_agent_act == "book"
        event = self._absorb(user_act)
        if user_act.act == "closing":
            self._finish("user_end")
            return None, event
        if user_act.act == "deny" and agent_was_booking:
            self._finish("deny_booking")
            return None, event
        if self.lines >= self.turn_cap:
            self._finish("turn_cap")
            return None, event

        before = self.state
        vec = featurize(before, self.turn_cap)
        action = self.actor.select(before, vec)
        agent_act = resolve_action(self.tracker, before, action)
        reply_event = self._absorb(agent_act)
        event = event or reply_event
        for st in SUBTASKS:                 # booking boundary, Table-2 style
            if st in self.state.booked and st not in before.booked:
                booked = {"turn": self.lines, "kind": "booking",
                          "subtask": st}
                self.events.append(booked)
                event = event or booked
        if agent_act.act == "closing":
            self._finish("agent_closing")
        elif self.lines >= self.turn_cap:
            self._finish("turn_cap")
        return agent_act, event

    def record(self):
        return {
            "session_id": self.session_id,
            "goal": self.goal.to_json(),
            "transcript": [a.to_json() for a in self.transcript],
            "events": list(self.events),
            "status": "done" if self.done else "active",
            "outcome": self.outcome,
            "rating": self.rating,
            "agent": self.agent_name if self.done else None,
            "config": self.config_hash,
        }
