"""User goal sampling: solvability and joint constraints."""

import numpy as np

from sgrl.dialog.kb import generate_kb
from sgrl.dialog.schema import (AGENT_INFORMABLE, FLIGHT, HOTEL,
                                JOINT_CONSTRAINTS, KB_ONLY_SLOTS)
from sgrl.sim.goals import UserGoal, sample_goal, validate_goal


def _kb():
    return generate_kb(7, n_flights=60, n_hotels=40)


def test_sampled_goals_validate():
    kb = _kb()
    rng = np.random.default_rng(3)
    for _ in range(100):
        validate_goal(sample_goal(kb, rng), kb)


def test_joint_constraints_hold():
    kb = _kb()
    rng = np.random.default_rng(4)
    for _ in range(100):
        goal = sample_goal(kb, rng)
        merged = dict(goal.flight_inform)
        merged.update(goal.hotel_inform)
        for hotel_slot, flight_slot in JOINT_CONSTRAINTS.items():
            if hotel_slot in merged and flight_slot in merged:
                assert merged[hotel_slot] == merged[flight_slot]


def test_requests_are_answerable_and_disjoint_from_informs():
    kb = _kb()
    rng = np.random.default_rng(5)
    for _ in range(100):
        goal = sample_goal(kb, rng)
        for slot in goal.all_requests():
            assert slot in AGENT_INFORMABLE
        assert not set(goal.flight_request) & set(goal.flight_inform)
        assert not set(goal.hotel_request) & set(goal.hotel_inform)
        # constraints never name KB-only slots; those are asked, not given
        for slot in KB_ONLY_SLOTS:
            assert slot not in goal.flight_inform
            assert slot not in goal.hotel_inform


def test_goal_is_satisfiable_in_kb():
    kb = _kb()
    rng = np.random.default_rng(6)
    for _ in range(50):
        goal = sample_goal(kb, rng)
        assert kb.match_count(FLIGHT, dict(goal.flight_inform)) >= 1
        assert kb.match_count(HOTEL, dict(goal.hotel_inform)) >= 1


def test_accessors():
    kb = _kb()
    goal = sample_goal(kb, np.random.default_rng(7))
    assert goal.inform_slots(FLIGHT) == goal.flight_inform
    assert goal.inform_slots(HOTEL) == goal.hotel_inform
    assert set(goal.all_requests()) == \
        set(goal.flight_request) | set(goal.hotel_request)
    for slot, value in goal.flight_inform.items():
        assert goal.value_of(slot) == value


def test_json_round_trip():
    kb = _kb()
    goal = sample_goal(kb, np.random.default_rng(8))
    again = UserGoal.from_json(goal.to_json())
    assert again == goal


def test_sampling_deterministic_under_seed():
    kb = _kb()
    a = [sample_goal(kb, np.random.default_rng(9)) for _ in range(5)]
    b = [sample_goal(kb, np.random.default_rng(9)) for _ in range(5)]
    assert a == b
