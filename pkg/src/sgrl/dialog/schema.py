"""Travel-domain slot schema and dialogue acts.

Two subtasks, flight and hotel, with three joint constraints tying them:
the hotel city equals the flight destination, the check-in date equals the
departure date (same-day arrival), and the hotel party size equals the
flight party size.
"""

from dataclasses import dataclass, field

FLIGHT = "flight"
HOTEL = "hotel"
SUBTASKS = (FLIGHT, HOTEL)

FLIGHT_SLOTS = (
    "or_city", "dst_city", "depart_date_dep", "depart_time_dep",
    "return_date_dep", "return_time_dep", "numberofpeople", "seat", "price",
)
HOTEL_SLOTS = (
    "hotel_city", "hotel_date_checkin", "hotel_date_checkout",
    "hotel_numberofpeople", "hotel_name", "hotel_price", "hotel_amenity_wifi",
)
ALL_SLOTS = FLIGHT_SLOTS + HOTEL_SLOTS

SLOT_TYPES = {
    "or_city": "city", "dst_city": "city",
    "depart_date_dep": "date", "return_date_dep": "date",
    "depart_time_dep": "time", "return_time_dep": "time",
    "numberofpeople": "count", "seat": "enum", "price": "money",
    "hotel_city": "city", "hotel_date_checkin": "date",
    "hotel_date_checkout": "date", "hotel_numberofpeople": "count",
    "hotel_name": "name", "hotel_price": "money", "hotel_amenity_wifi": "boolean",
}

SLOT_SUBTASK = {s: FLIGHT for s in FLIGHT_SLOTS}
SLOT_SUBTASK.update({s: HOTEL for s in HOTEL_SLOTS})

# joint constraints: hotel slot -> flight slot it must equal
JOINT_CONSTRAINTS = {
    "hotel_city": "dst_city",
    "hotel_date_checkin": "depart_date_dep",
    "hotel_numberofpeople": "numberofpeople",
}

# slots whose values live in the KB rather than the user's head; the agent
# answers these, it does not ask for them
KB_ONLY_SLOTS = ("price", "hotel_price", "hotel_name")

ANY_VALUE = "any"

ACT_TYPES = (
    "request", "inform", "confirm", "book", "deny",
    "thanks", "closing", "inform_subtask_complete",
)

AGENT = "agent"
USER = "user"


@dataclass(frozen=True)
class DialogueAct:
    """One dialogue act: speaker, act type, slot-value map.

    Request acts carry slots with empty values; inform acts carry non-empty
    values. confirm / book / deny / inform_subtask_complete may carry a
    "subtask" entry naming flight or hotel.
    """

    speaker: str
    act: str
    slots: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.speaker not in (AGENT, USER):
            raise ValueError("bad speaker %r" % self.speaker)
        if self.act not in ACT_TYPES:
            raise ValueError("unknown act type %r" % self.act)
        for slot, value in self.slots.items():
            if slot == "subtask":
                if self.act not in ("confirm", "book", "deny",
                                    "inform_subtask_complete"):
                    raise ValueError("%r cannot carry a subtask" % self.act)
                if value not in SUBTASKS:
                    raise ValueError("unknown subtask %r" % value)
                continue
            if slot not in ALL_SLOTS:
                raise ValueError("unknown slot %r" % slot)
            if self.act == "request" and value:
                raise ValueError("request slots must carry empty values")
            if self.act == "inform" and not value:
                raise ValueError("inform slots must carry non-empty values")

    def to_json(self):
        return {"speaker": self.speaker, "act": self.act,
                "slots": {k: self.slots[k] for k in sorted(self.slots)}}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["speaker"], obj["act"], dict(obj.get("slots", {})))


def request(speaker, slot):
    return DialogueAct(speaker, "request", {slot: ""})


def inform(speaker, slot, value):
    return DialogueAct(speaker, "inform", {slot: str(value)})


# ---------------------------------------------------------------------------
# Agent action inventory. The policy picks an index; the environment resolves
# inform values from the currently selected KB row.

AGENT_REQUESTABLE = tuple(s for s in ALL_SLOTS if s not in KB_ONLY_SLOTS)
AGENT_INFORMABLE = (
    "depart_time_dep", "return_date_dep", "return_time_dep", "seat", "price",
    "hotel_name", "hotel_price", "hotel_date_checkout", "hotel_amenity_wifi",
)


def build_action_table():
    """Returns the list of abstract agent actions, index = action id."""
    actions = []
    for slot in AGENT_REQUESTABLE:
        actions.append(("request", slot))
    for slot in AGENT_INFORMABLE:
        actions.append(("inform", slot))
    for st in SUBTASKS:
        actions.append(("confirm", st))
    for st in SUBTASKS:
        actions.append(("book", st))
    actions.append(("inform_subtask_complete", None))
    actions.append(("closing", None))
    return tuple(actions)


ACTION_TABLE = build_action_table()
NUM_ACTIONS = len(ACTION_TABLE)
