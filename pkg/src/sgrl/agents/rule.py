"""Scripted flight-first baseline agent.

The script per subtask: request every requestable slot in a fixed order,
then answer that subtask's pending user requests, then confirm until the
user agrees, then book. The script never skips a question even when the
KB is already pinned down to one row, and hotel questions raised while the
flight phase is still running wait until the flight is booked. Both habits
burn lines against the dialogue cap, which is where this agent loses.

Policies expose select(state, vec, rng) -> abstract action id; the
environment resolves inform values.
"""

from ..dialog.schema import (ACTION_TABLE, SLOT_SUBTASK, SUBTASKS,
                             AGENT_INFORMABLE)

ACTION_INDEX = {a: i for i, a in enumerate(ACTION_TABLE)}

SCRIPTED_REQUESTS = {
    "flight": ("or_city", "dst_city", "depart_date_dep", "numberofpeople",
               "seat", "depart_time_dep", "return_date_dep",
               "return_time_dep"),
    "hotel": ("hotel_city", "hotel_date_checkin", "hotel_numberofpeople",
              "hotel_date_checkout", "hotel_amenity_wifi"),
}


class RulePolicy:
    name = "rule"

    def reset(self):
        pass

    def select(self, state, vec=None, rng=None):
        if state.last_user_act == "thanks":
            return ACTION_INDEX[("closing", None)]
        for subtask in SUBTASKS:
            if subtask in state.booked:
                continue
            for slot in SCRIPTED_REQUESTS[subtask]:
                # skip slots the user asked back or we already answered
                if slot in state.user_values or slot in state.requested:
                    continue
                if slot in state.agent_values:
                    continue
                return ACTION_INDEX[("request", slot)]
            pending = [s for s in AGENT_INFORMABLE
                       if s in state.requested and SLOT_SUBTASK[s] == subtask]
            if pending:
                return ACTION_INDEX[("inform", pending[0])]
            if subtask not in state.confirmed:
                return ACTION_INDEX[("confirm", subtask)]
            return ACTION_INDEX[("book", subtask)]
        # both booked: answer stragglers, otherwise signal completion
        pending = [s for s in AGENT_INFORMABLE if s in state.requested]
        if pending:
            return ACTION_INDEX[("inform", pending[0])]
        return ACTION_INDEX[("inform_subtask_complete", None)]
