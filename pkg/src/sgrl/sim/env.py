"""Dialogue environment: agent-first exchange loop with reward accounting.

A turn is one act by either party, so a normal RL step (agent act plus user
reply) advances the turn count by two. Rewards: -1 per turn; on termination
+2*cap for success, -cap for failure. The terminal bonus lands on the step
that ended the episode, so the episode total is exactly
-turns + (2*cap if success else -cap).
"""

from dataclasses import dataclass, field

from ..dialog.featurizer import featurize
from ..dialog.schema import AGENT, DialogueAct
from ..dialog.tracker import DialogueTracker
from .goals import sample_goal
from .user import AgendaUser, dialogue_success


@dataclass
class StepResult:
    state: object
    vec: object
    line_states: list
    line_vecs: list
    acts: list
    reward: int
    lines_added: int
    done: bool
    success: bool = None
    reason: str = None


@dataclass
class EpisodeOutcome:
    success: bool
    turns: int
    reward: int              # total extrinsic, including terminal bonus
    reason: str
    goal: object = None
    acts: list = field(default_factory=list)
    states: list = field(default_factory=list)   # vectors, s_0 included
    rewards: list = field(default_factory=list)  # per turn, bonus folded into last
    seed: int = None


def resolve_action(tracker, state, action_id):
    """Resolve an abstract action id to a concrete agent act; inform values
    come from the currently selected KB row for the slot's subtask."""
    from ..dialog.schema import ACTION_TABLE, SLOT_SUBTASK
    kind, arg = ACTION_TABLE[action_id]
    if kind == "request":
        return DialogueAct(AGENT, "request", {arg: ""})
    if kind == "inform":
        row = tracker.selected_row(state, SLOT_SUBTASK[arg])
        value = str(row[arg]) if row is not None else "unavailable"
        return DialogueAct(AGENT, "inform", {arg: value})
    if kind in ("confirm", "book"):
        return DialogueAct(AGENT, kind, {"subtask": arg})
    if kind == "inform_subtask_complete":
        return DialogueAct(AGENT, "inform_subtask_complete")
    return DialogueAct(AGENT, "closing")


class DialogueEnv:
    def __init__(self, kb, turn_cap=60, patience=4, switch_prob=0.3,
                 slip_prob=0.17):
        self.kb = kb
        self.turn_cap = turn_cap
        self.patience = patience
        self.switch_prob = switch_prob
        self.slip_prob = slip_prob
        self.tracker = DialogueTracker(kb)
        self.state = None
        self.goal = None
        self.user = None
        self.lines = 0
        self.done = True

    def reset(self, rng, goal=None):
        self.goal = goal if goal is not None else sample_goal(self.kb, rng)
        self.user = AgendaUser(self.goal, self.tracker, rng,
                               patience=self.patience,
                               switch_prob=self.switch_prob,
                               slip_prob=self.slip_prob)
        self.state = self.tracker.fresh()
        self.lines = 0
        self.done = False
        return self.state, featurize(self.state, self.turn_cap)

    def act_from_index(self, action_id, state=None):
        state = state if state is not None else self.state
        return resolve_action(self.tracker, state, action_id)

    def _finish(self, reason):
        self.done = True
        success = dialogue_success(self.state, self.goal, self.kb,
                                   self.lines, self.turn_cap)
        bonus = 2 * self.turn_cap if success else -self.turn_cap
        return success, bonus, reason

    def step(self, agent_act):
        assert not self.done, "episode already finished"
        before = self.state
        line_states, acts = [], [agent_act]
        self.state = self.tracker.track(before, agent_act)
        self.lines += 1
        line_states.append(self.state)

        success, bonus, reason = None, 0, None
        if agent_act.act == "closing":
            success, bonus, reason = self._finish("agent_closing")
        elif self.lines >= self.turn_cap:
            success, bonus, reason = self._finish("turn_cap")
        else:
            user_act, over = self.user.respond(before, self.state, agent_act)
            acts.append(user_act)
            after_agent = self.state
            self.state = self.tracker.track(after_agent, user_act)
            self.lines += 1
            line_states.append(self.state)
            if over:
                cause = ("patience" if user_act.act == "closing"
                         else "deny_booking" if user_act.act == "deny"
                         else "user_end")
                success, bonus, reason = self._finish(cause)
            elif self.lines >= self.turn_cap:
                success, bonus, reason = self._finish("turn_cap")

        reward = -len(line_states) + bonus
        vecs = [featurize(s, self.turn_cap) for s in line_states]
        return StepResult(state=self.state, vec=vecs[-1],
                          line_states=line_states, line_vecs=vecs, acts=acts,
                          reward=reward, lines_added=len(line_states),
                          done=self.done, success=success, reason=reason)
