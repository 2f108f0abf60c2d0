"""Dialogue state tracking.

track() is a pure function: it builds a fresh TrackerState from the previous
one and a single act, never mutating its inputs. Slot fill statuses move only
forward (unknown -> user-informed -> agent-informed -> confirmed); a user
re-inform may change a value but not lower the status. The turn index counts
agent acts only.

Joint constraints are enforced where goals are sampled, so the linked slot
pairs arrive with equal values through the user's informs; the tracker just
records what was actually said.
"""

from dataclasses import dataclass, field, replace

from .schema import (AGENT, ANY_VALUE, FLIGHT, HOTEL,
                     SLOT_SUBTASK, SUBTASKS, USER)

UNKNOWN, USER_INFORMED, AGENT_INFORMED, CONFIRMED = 0, 1, 2, 3

# slots that can constrain a KB query (everything the rows actually carry)
_MATCHABLE = {
    FLIGHT: ("or_city", "dst_city", "depart_date_dep", "depart_time_dep",
             "return_date_dep", "return_time_dep", "seat", "numberofpeople"),
    HOTEL: ("hotel_city", "hotel_name", "hotel_date_checkin",
            "hotel_date_checkout", "hotel_amenity_wifi", "hotel_numberofpeople"),
}


@dataclass(frozen=True)
class TrackerState:
    status: dict = field(default_factory=dict)        # slot -> 0..3
    user_values: dict = field(default_factory=dict)   # constraints incl. joint-derived
    agent_values: dict = field(default_factory=dict)  # answers the agent has given
    requested: frozenset = frozenset()                # pending user requests
    confirmed: frozenset = frozenset()                # user-confirmed subtasks
    booked: dict = field(default_factory=dict)        # subtask -> row id
    last_user_act: str = None
    last_agent_act: str = None
    turn: int = 0
    kb_counts: tuple = (0, 0)                         # matches under current constraints


def constraints_for(state, subtask):
    """User-side constraints restricted to what rows of `subtask` can match."""
    return {s: state.user_values[s] for s in _MATCHABLE[subtask]
            if s in state.user_values and state.user_values[s] not in (ANY_VALUE, "")}


class DialogueTracker:
    """Applies acts to TrackerStates against a fixed KB."""

    def __init__(self, kb):
        self.kb = kb

    def fresh(self):
        state = TrackerState(status={}, user_values={}, agent_values={},
                             booked={})
        return self._with_counts(state)

    def _with_counts(self, state):
        counts = tuple(self.kb.match_count(st, constraints_for(state, st))
                       for st in SUBTASKS)
        return replace(state, kb_counts=counts)

    def selected_row(self, state, subtask):
        """Deterministic current selection: first row matching the user's
        constraints, or None."""
        return self.kb.first_match(subtask, constraints_for(state, subtask))

    def track(self, state, act):
        status = dict(state.status)
        user_values = dict(state.user_values)
        agent_values = dict(state.agent_values)
        requested = set(state.requested)
        confirmed = set(state.confirmed)
        booked = dict(state.booked)
        turn = state.turn
        last_user = state.last_user_act
        last_agent = state.last_agent_act

        def absorb_inform(slot, value):
            user_values[slot] = value
            status[slot] = max(status.get(slot, UNKNOWN), USER_INFORMED)

        if act.speaker == USER:
            last_user = act.act
            if act.act == "inform":
                for slot, value in act.slots.items():
                    absorb_inform(slot, value)
            elif act.act == "request":
                for slot in act.slots:
                    requested.add(slot)
            elif act.act == "confirm":
                st = act.slots.get("subtask")
                if st in SUBTASKS:
                    confirmed.add(st)
                    for slot, lvl in status.items():
                        if SLOT_SUBTASK.get(slot) == st and lvl >= USER_INFORMED:
                            status[slot] = CONFIRMED
            elif act.act == "deny":
                for slot, value in act.slots.items():
                    if slot != "subtask" and value:
                        absorb_inform(slot, value)
            # book / thanks / closing leave slot state alone
        else:
            last_agent = act.act
            turn += 1
            if act.act == "inform":
                for slot, value in act.slots.items():
                    agent_values[slot] = value
                    status[slot] = max(status.get(slot, UNKNOWN), AGENT_INFORMED)
                    requested.discard(slot)
            elif act.act == "book":
                st = act.slots.get("subtask")
                if st in SUBTASKS and st not in booked:
                    next_state = replace(state, user_values=user_values)
                    row = self.selected_row(next_state, st)
                    if row is not None:
                        booked[st] = row["id"]
            # request / confirm / closing / inform_subtask_complete only
            # move the turn counter and last-act record

        out = TrackerState(status=status, user_values=user_values,
                           agent_values=agent_values,
                           requested=frozenset(requested),
                           confirmed=frozenset(confirmed), booked=booked,
                           last_user_act=last_user, last_agent_act=last_agent,
                           turn=turn)
        return self._with_counts(out)
