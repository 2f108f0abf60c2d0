"""Agenda-based user simulator.

The user keeps a per-subtask agenda built from the goal: inform items first,
then request items, then a booking request once both agendas drain. It
responds directly to agent requests / confirms / bookings, repeats its oldest
unanswered request when ignored, and volunteers agenda items otherwise.

Patience: an agent act is non-progressing when it leaves the user's pending
requests unanswered, or elicits nothing new. After `patience` consecutive
non-progressing acts the user hangs up.

Subtask switching: once the current subtask's informs are exhausted, the
user jumps to the other subtask's agenda with probability `switch_prob` per
turn, which is what collides with a strictly flight-first scripted agent.

Slips: with probability `slip_prob` an answer carries a wrong value (at most
once per slot). The user only notices when a confirm or book shows them a
concrete candidate that violates the real goal, so every slip costs a
deny / re-confirm cycle, and an agent that books without confirming first
can lose the dialogue outright.
"""

from ..dialog.kb import PEOPLE_SLOTS
from ..dialog.schema import (AGENT_INFORMABLE, ANY_VALUE, FLIGHT, HOTEL,
                             SLOT_SUBTASK, SUBTASKS, USER, DialogueAct)
from ..dialog.tracker import AGENT_INFORMED, USER_INFORMED

# canonical agenda ordering per subtask
_INFORM_ORDER = {
    FLIGHT: ("or_city", "dst_city", "depart_date_dep", "numberofpeople",
             "seat", "return_date_dep", "return_time_dep", "depart_time_dep"),
    HOTEL: ("hotel_city", "hotel_date_checkin", "hotel_numberofpeople",
            "hotel_amenity_wifi"),
}
_REQUEST_ORDER = {
    FLIGHT: ("depart_time_dep", "return_date_dep", "return_time_dep",
             "seat", "price"),
    HOTEL: ("hotel_name", "hotel_price", "hotel_date_checkout",
            "hotel_amenity_wifi"),
}


def row_satisfies(row, informs):
    """Does a KB row satisfy every goal inform (party size via capacity)?"""
    if row is None:
        return False
    for slot, value in informs.items():
        if value == ANY_VALUE:
            continue
        if slot in ("numberofpeople", "hotel_numberofpeople"):
            if row["capacity"] < int(value):
                return False
        elif row.get(slot) != value:
            return False
    return True


def dialogue_success(state, goal, kb, lines, turn_cap):
    """Success: both subtasks booked on rows satisfying every goal inform,
    every goal request answered consistently with the booked rows, and the
    dialogue fit inside the turn cap."""
    if lines > turn_cap:
        return False
    for st in SUBTASKS:
        if st not in state.booked:
            return False
        if not row_satisfies(kb.row(st, state.booked[st]), goal.inform_slots(st)):
            return False
    for st in SUBTASKS:
        row = kb.row(st, state.booked[st])
        for slot in goal.request_slots(st):
            if state.agent_values.get(slot) != str(row[slot]):
                return False
    return True


class AgendaUser:
    def __init__(self, goal, tracker, rng, patience=4, switch_prob=0.3,
                 slip_prob=0.0):
        self.goal = goal
        self.tracker = tracker
        self.rng = rng
        self.patience = patience
        self.switch_prob = switch_prob
        self.slip_prob = slip_prob
        self.slipped = set()
        self.queues = {st: [("inform", s) for s in _INFORM_ORDER[st]
                            if s in goal.inform_slots(st)]
                       + [("request", s) for s in _REQUEST_ORDER[st]
                          if s in goal.request_slots(st)]
                       for st in SUBTASKS}
        self.current = FLIGHT
        self.asked = []          # my requests, oldest first
        self.streak = 0          # consecutive non-progressing agent acts
        self.thanked = False

    def _answer(self, slot):
        """Goal value for `slot`, occasionally garbled by a slip."""
        truth = self.goal.value_of(slot)
        if (self.slip_prob > 0.0 and slot not in self.slipped
                and self.rng.random() < self.slip_prob):
            self.slipped.add(slot)
            kb = self.tracker.kb
            table = kb.flights if SLOT_SUBTASK[slot] == FLIGHT else kb.hotels
            if slot in PEOPLE_SLOTS:
                pool = sorted({str(n) for n in range(1, 6)} - {truth})
            else:
                pool = sorted({str(r[slot]) for r in table} - {truth})
            if pool:
                return pool[int(self.rng.integers(0, len(pool)))]
        return truth

    # -- progress ---------------------------------------------------------

    def _is_progress(self, before, act):
        pending = before.requested
        if pending:
            return act.act == "inform" and any(s in pending for s in act.slots)
        if act.act == "request":
            slot = next(iter(act.slots))
            return before.status.get(slot, 0) == 0
        if act.act == "inform":
            return any(slot in self.goal.all_requests()
                       and before.status.get(slot, 0) < AGENT_INFORMED
                       for slot in act.slots)
        if act.act == "confirm":
            return act.slots.get("subtask") not in before.confirmed
        if act.act == "book":
            return act.slots.get("subtask") not in before.booked
        # closing is terminal; inform_subtask_complete is a status nicety
        return act.act in ("closing", "inform_subtask_complete")

    # -- agenda -----------------------------------------------------------

    def _informs_left(self, st):
        return any(kind == "inform" for kind, _ in self.queues[st])

    def _satisfied(self, state, kind, slot):
        if kind == "inform":
            return slot in state.user_values
        return state.status.get(slot, 0) >= AGENT_INFORMED

    def _pop_agenda(self, state):
        other = HOTEL if self.current == FLIGHT else FLIGHT
        if not self.queues[self.current]:
            self.current = other
        elif (self.queues[other] and not self._informs_left(self.current)
              and self.rng.random() < self.switch_prob):
            self.current = other
        queue = self.queues[self.current]
        while queue:
            kind, slot = queue.pop(0)
            if self._satisfied(state, kind, slot):
                continue
            if kind == "inform":
                return DialogueAct(USER, "inform", {slot: self._answer(slot)})
            self.asked.append(slot)
            return DialogueAct(USER, "request", {slot: ""})
        return None

    # -- main entry -------------------------------------------------------

    def respond(self, before, after, act):
        """React to one agent act.

        `before` / `after` are the tracker states around the act. Returns
        (user_act, episode_over). Caller tracks the user act when over is
        False, or when it wants terminal acts on the transcript too.
        """
        if self._is_progress(before, act):
            self.streak = 0
        else:
            self.streak += 1
            if self.streak >= self.patience:
                return DialogueAct(USER, "closing"), True

        if self.thanked:
            return DialogueAct(USER, "thanks"), False

        if act.act == "book":
            st = act.slots.get("subtask")
            row_id = after.booked.get(st)
            row = self.tracker.kb.row(st, row_id) if row_id is not None else None
            if st in before.booked:
                pass                      # re-book of a done subtask: ignore
            elif not row_satisfies(row, self.goal.inform_slots(st)):
                return DialogueAct(USER, "deny", {"subtask": st}), True
            return self._continue(after)

        if act.act == "confirm":
            st = act.slots.get("subtask")
            if st not in SUBTASKS:
                return self._continue(after)
            row = self.tracker.selected_row(after, st)
            if row_satisfies(row, self.goal.inform_slots(st)):
                return DialogueAct(USER, "confirm", {"subtask": st}), False
            for slot in _INFORM_ORDER[st]:
                value = self.goal.inform_slots(st).get(slot)
                if value is not None and after.user_values.get(slot) != value:
                    return DialogueAct(USER, "deny", {"subtask": st, slot: value}), False
            # constraints all stated yet the selection violates the goal:
            # row disagrees on a stated slot, restate the first mismatch
            for slot, value in self.goal.inform_slots(st).items():
                if not row_satisfies(row, {slot: value}):
                    return DialogueAct(USER, "deny", {"subtask": st, slot: value}), False
            return DialogueAct(USER, "deny", {"subtask": st}), False

        if act.act == "request":
            slot = next(iter(act.slots))
            if self.goal.value_of(slot) is not None:
                return DialogueAct(USER, "inform", {slot: self._answer(slot)}), False
            if slot in self.goal.all_requests():
                if slot not in self.asked:
                    self.asked.append(slot)
                return DialogueAct(USER, "request", {slot: ""}), False
            return DialogueAct(USER, "inform", {slot: ANY_VALUE}), False

        return self._continue(after)

    def _continue(self, state):
        self.asked = [s for s in self.asked if s in state.requested]
        if self.asked:
            return DialogueAct(USER, "request", {self.asked[0]: ""}), False
        nxt = self._pop_agenda(state)
        if nxt is not None:
            return nxt, False
        unbooked = [st for st in SUBTASKS if st not in state.booked]
        if unbooked:
            return DialogueAct(USER, "book", {"subtask": unbooked[0]}), False
        self.thanked = True
        return DialogueAct(USER, "thanks"), False
