"""User goal sampling and solvability checking.

Goals are sampled from actual KB rows, so every goal is solvable by
construction: pick a flight row, pick a hotel row compatible with it under
the joint constraints, then derive the inform values from those rows and
split the remaining slots between informs and requests.
"""

import json
from dataclasses import dataclass, field

from ..dialog.kb import PEOPLE_SLOTS
from ..dialog.schema import (ANY_VALUE, FLIGHT, HOTEL, JOINT_CONSTRAINTS,
                             KB_ONLY_SLOTS, SLOT_SUBTASK)


@dataclass(frozen=True)
class UserGoal:
    flight_inform: dict = field(default_factory=dict)
    flight_request: tuple = ()
    hotel_inform: dict = field(default_factory=dict)
    hotel_request: tuple = ()

    def inform_slots(self, subtask):
        return self.flight_inform if subtask == FLIGHT else self.hotel_inform

    def request_slots(self, subtask):
        return self.flight_request if subtask == FLIGHT else self.hotel_request

    def all_requests(self):
        return tuple(self.flight_request) + tuple(self.hotel_request)

    def value_of(self, slot):
        st = SLOT_SUBTASK[slot]
        return self.inform_slots(st).get(slot)

    def to_json(self):
        # request order is part of the goal (it drives the user's agenda),
        # so serialize it as is; informs are a plain mapping
        return {
            "flight": {"inform": dict(sorted(self.flight_inform.items())),
                       "request": list(self.flight_request)},
            "hotel": {"inform": dict(sorted(self.hotel_inform.items())),
                      "request": list(self.hotel_request)},
        }

    @classmethod
    def from_json(cls, obj):
        return cls(flight_inform=dict(obj["flight"]["inform"]),
                   flight_request=tuple(obj["flight"]["request"]),
                   hotel_inform=dict(obj["hotel"]["inform"]),
                   hotel_request=tuple(obj["hotel"]["request"]))


def sample_goal(kb, rng):
    """Draw a solvable goal; see module docstring for the construction."""
    for _ in range(200):
        flight = kb.flights[int(rng.integers(0, len(kb.flights)))]
        compatible = kb.query(HOTEL, {
            "hotel_city": flight["dst_city"],
            "hotel_date_checkin": flight["depart_date_dep"],
        })
        if compatible:
            break
    else:
        raise RuntimeError("KB has no joint-compatible flight/hotel pair")
    hotel = compatible[int(rng.integers(0, len(compatible)))]
    people = int(rng.integers(1, min(flight["capacity"], hotel["capacity"]) + 1))

    flight_inform = {
        "or_city": flight["or_city"],
        "dst_city": flight["dst_city"],
        "depart_date_dep": flight["depart_date_dep"],
        "numberofpeople": str(people),
    }
    flight_request = ["price"]
    # optional flight slots: inform (value from the row), request, or absent
    for slot, p_inform, p_request in (("seat", 0.5, 0.7),
                                      ("return_date_dep", 0.4, 0.6),
                                      ("return_time_dep", 0.2, 0.5),
                                      ("depart_time_dep", 0.2, 0.6)):
        r = rng.random()
        if r < p_inform:
            flight_inform[slot] = flight[slot]
        elif r < p_inform + p_request:
            flight_request.append(slot)

    hotel_inform = {
        "hotel_city": flight["dst_city"],
        "hotel_date_checkin": flight["depart_date_dep"],
        "hotel_numberofpeople": str(people),
    }
    hotel_request = ["hotel_name", "hotel_price"]
    if rng.random() < 0.3:
        hotel_inform["hotel_amenity_wifi"] = hotel["hotel_amenity_wifi"]
    elif rng.random() < 0.4:
        hotel_request.append("hotel_amenity_wifi")
    if rng.random() < 0.5:
        hotel_request.append("hotel_date_checkout")

    return UserGoal(flight_inform=flight_inform,
                    flight_request=tuple(flight_request),
                    hotel_inform=hotel_inform,
                    hotel_request=tuple(hotel_request))


def validate_goal(goal, kb):
    """Check joint-constraint consistency and KB solvability. Returns a list
    of problems, empty when the goal is valid."""
    problems = []
    for hslot, fslot in JOINT_CONSTRAINTS.items():
        hv, fv = goal.hotel_inform.get(hslot), goal.flight_inform.get(fslot)
        if hv is not None and fv is not None and hv != fv:
            problems.append("joint constraint %s != %s" % (hslot, fslot))
    for subtask in (FLIGHT, HOTEL):
        informs = goal.inform_slots(subtask)
        requests = goal.request_slots(subtask)
        overlap = set(informs) & set(requests)
        if overlap:
            problems.append("slots both informed and requested: %s" % sorted(overlap))
        for slot in informs:
            if slot in KB_ONLY_SLOTS:
                problems.append("goal informs KB-only slot %s" % slot)
        constraints = {s: v for s, v in informs.items() if v != ANY_VALUE}
        matchable = {s: v for s, v in constraints.items()
                     if s in PEOPLE_SLOTS or (kb._table(subtask) and s in kb._table(subtask)[0])}
        if kb.match_count(subtask, matchable) == 0:
            problems.append("no %s row satisfies the goal constraints" % subtask)
    return problems


def save_goals(goals, path):
    with open(path, "w") as fh:
        for g in goals:
            fh.write(json.dumps(g.to_json(), sort_keys=True) + "\n")


def load_goals(path):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(UserGoal.from_json(json.loads(line)))
    return out
