"""State tracker semantics: status lattice, requests, booking."""

from sgrl.dialog.kb import generate_kb
from sgrl.dialog.schema import AGENT, FLIGHT, HOTEL, USER, DialogueAct
from sgrl.dialog.tracker import (AGENT_INFORMED, CONFIRMED, USER_INFORMED,
                                 DialogueTracker, constraints_for)


def _tracker():
    return DialogueTracker(generate_kb(7, n_flights=60, n_hotels=40))


def _inform(speaker, slot, value):
    return DialogueAct(speaker, "inform", {slot: value})


def test_track_is_pure():
    tr = _tracker()
    s0 = tr.fresh()
    s1 = tr.track(s0, _inform(USER, "or_city", "Lima"))
    assert "or_city" not in s0.user_values
    assert s1.user_values["or_city"] == "Lima"
    assert s1.status["or_city"] == USER_INFORMED


def test_status_moves_forward_only():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, _inform(AGENT, "price", "900"))
    assert s.status["price"] == AGENT_INFORMED
    # a later user mention cannot demote the slot
    s = tr.track(s, _inform(USER, "price", "900"))
    assert s.status["price"] == AGENT_INFORMED


def test_agent_inform_discharges_request():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, DialogueAct(USER, "request", {"price": ""}))
    assert "price" in s.requested
    s = tr.track(s, _inform(AGENT, "price", "940"))
    assert "price" not in s.requested
    assert s.agent_values["price"] == "940"


def test_confirm_promotes_subtask_slots():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, _inform(USER, "or_city", "Lima"))
    s = tr.track(s, _inform(USER, "hotel_city", "Boston"))
    s = tr.track(s, DialogueAct(USER, "confirm", {"subtask": FLIGHT}))
    assert s.status["or_city"] == CONFIRMED
    assert s.status["hotel_city"] == USER_INFORMED
    assert FLIGHT in s.confirmed


def test_turn_counts_agent_acts_only():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, _inform(USER, "or_city", "Lima"))
    assert s.turn == 0
    s = tr.track(s, DialogueAct(AGENT, "request", {"dst_city": ""}))
    assert s.turn == 1


def test_booking_uses_selected_row():
    tr = _tracker()
    row = tr.kb.flights[0]
    s = tr.fresh()
    s = tr.track(s, _inform(USER, "or_city", row["or_city"]))
    s = tr.track(s, _inform(USER, "dst_city", row["dst_city"]))
    picked = tr.selected_row(s, FLIGHT)
    s = tr.track(s, DialogueAct(AGENT, "book", {"subtask": FLIGHT}))
    assert s.booked[FLIGHT] == picked["id"]
    # booking again does not overwrite
    s2 = tr.track(s, DialogueAct(AGENT, "book", {"subtask": FLIGHT}))
    assert s2.booked[FLIGHT] == picked["id"]


def test_booking_without_match_is_a_noop():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, _inform(USER, "hotel_city", "Atlantis"))
    s = tr.track(s, DialogueAct(AGENT, "book", {"subtask": HOTEL}))
    assert HOTEL not in s.booked


def test_constraints_skip_any_and_unmatchable():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, _inform(USER, "or_city", "Lima"))
    s = tr.track(s, _inform(USER, "seat", "any"))
    cons = constraints_for(s, FLIGHT)
    assert cons == {"or_city": "Lima"}


def test_kb_counts_shrink_with_constraints():
    tr = _tracker()
    s = tr.fresh()
    full = s.kb_counts[0]
    row = tr.kb.flights[3]
    s = tr.track(s, _inform(USER, "or_city", row["or_city"]))
    s = tr.track(s, _inform(USER, "dst_city", row["dst_city"]))
    assert 1 <= s.kb_counts[0] <= full


def test_deny_carries_replacement_value():
    tr = _tracker()
    s = tr.fresh()
    s = tr.track(s, _inform(USER, "seat", "economy"))
    s = tr.track(s, DialogueAct(USER, "deny", {"subtask": FLIGHT,
                                               "seat": "business"}))
    assert s.user_values["seat"] == "business"
