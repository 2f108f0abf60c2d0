"""Seeded synthetic knowledge base for the travel domain.

Rows are plain dicts whose keys reuse slot names, so tracker constraints can
be matched against rows directly. Query semantics: exact match on every
constrained slot, "any" is unconstrained, party-size slots match rows with
capacity >= requested. Results come back ordered by row id.
"""

import json

import numpy as np

from .schema import ANY_VALUE, FLIGHT, HOTEL

CITIES = (
    "Lima", "Curitiba", "Pittsburgh", "Fort Lauderdale", "Campinas",
    "Porto Alegre", "Seattle", "Atlanta", "Denver", "Chicago", "Boston", "Miami",
)
HOTEL_NAME_PATTERNS = ("Grand %s", "%s Plaza", "%s Inn", "Central %s", "%s Suites")
DATES = tuple("2016-09-%02d" % d for d in range(1, 31))
TIMES = tuple("%02d:00" % h for h in range(6, 24, 2))
SEATS = ("economy", "business")

FLIGHT_FIELDS = ("or_city", "dst_city", "depart_date_dep", "depart_time_dep",
                 "return_date_dep", "return_time_dep", "seat", "price")
HOTEL_FIELDS = ("hotel_city", "hotel_name", "hotel_date_checkin",
                "hotel_date_checkout", "hotel_amenity_wifi", "hotel_price")

PEOPLE_SLOTS = {"numberofpeople", "hotel_numberofpeople"}


class KnowledgeBase:
    def __init__(self, flights, hotels):
        self.flights = list(flights)
        self.hotels = list(hotels)
        for i, row in enumerate(self.flights):
            assert row["id"] == i, "flight ids must be dense and ordered"
        for i, row in enumerate(self.hotels):
            assert row["id"] == i, "hotel ids must be dense and ordered"
        self._columns = {}
        self._count_memo = {}

    def _table(self, subtask):
        return self.flights if subtask == FLIGHT else self.hotels

    def _column(self, subtask, field):
        key = (subtask, field)
        col = self._columns.get(key)
        if col is None:
            col = np.array([row[field] for row in self._table(subtask)], dtype=object)
            if field == "capacity":
                col = col.astype(np.int64)
            self._columns[key] = col
        return col

    def query_ids(self, subtask, constraints):
        """Row ids matching every constraint, ascending. Unknown values of
        "any" and empty strings are ignored."""
        table = self._table(subtask)
        mask = np.ones(len(table), dtype=bool)
        for slot, value in constraints.items():
            if value in (ANY_VALUE, ""):
                continue
            if slot in PEOPLE_SLOTS:
                mask &= self._column(subtask, "capacity") >= int(value)
            else:
                if len(table) and slot not in table[0]:
                    raise KeyError("slot %r not in %s rows" % (slot, subtask))
                mask &= self._column(subtask, slot) == value
        return np.nonzero(mask)[0]

    def query(self, subtask, constraints):
        table = self._table(subtask)
        return [table[i] for i in self.query_ids(subtask, constraints)]

    def match_count(self, subtask, constraints):
        key = (subtask, tuple(sorted(constraints.items())))
        n = self._count_memo.get(key)
        if n is None:
            n = int(len(self.query_ids(subtask, constraints)))
            self._count_memo[key] = n
        return n

    def first_match(self, subtask, constraints):
        ids = self.query_ids(subtask, constraints)
        return self._table(subtask)[ids[0]] if len(ids) else None

    def row(self, subtask, row_id):
        return self._table(subtask)[row_id]

    def to_json(self):
        return {"flights": self.flights, "hotels": self.hotels}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["flights"], obj["hotels"])


def generate_kb(seed, n_flights=200, n_hotels=100):
    """Deterministic synthetic KB.

    Most hotels are derived from a flight row (same city as the flight's
    destination, check-in on the departure date) so that solvable joint
    goals are plentiful.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x6B62]))
    flights = []
    for i in range(n_flights):
        orc, dst = rng.choice(len(CITIES), size=2, replace=False)
        date_i = int(rng.integers(0, len(DATES) - 8))
        ret_i = date_i + int(rng.integers(2, 8))
        flights.append({
            "id": i,
            "or_city": CITIES[orc],
            "dst_city": CITIES[dst],
            "depart_date_dep": DATES[date_i],
            "depart_time_dep": TIMES[int(rng.integers(0, len(TIMES)))],
            "return_date_dep": DATES[ret_i],
            "return_time_dep": TIMES[int(rng.integers(0, len(TIMES)))],
            "seat": SEATS[0] if rng.random() < 0.7 else SEATS[1],
            "price": str(int(rng.integers(15, 140)) * 10),
            "capacity": int(rng.integers(1, 6)),
        })
    hotels = []
    for i in range(n_hotels):
        if flights and rng.random() < 0.7:
            src = flights[int(rng.integers(0, len(flights)))]
            city, checkin = src["dst_city"], src["depart_date_dep"]
        else:
            city = CITIES[int(rng.integers(0, len(CITIES)))]
            checkin = DATES[int(rng.integers(0, len(DATES) - 8))]
        checkin_i = DATES.index(checkin)
        checkout_i = min(checkin_i + int(rng.integers(1, 8)), len(DATES) - 1)
        hotels.append({
            "id": i,
            "hotel_city": city,
            "hotel_name": HOTEL_NAME_PATTERNS[int(rng.integers(0, len(HOTEL_NAME_PATTERNS)))] % city,
            "hotel_date_checkin": checkin,
            "hotel_date_checkout": DATES[checkout_i],
            "hotel_amenity_wifi": "yes" if rng.random() < 0.6 else "no",
            "hotel_price": str(int(rng.integers(4, 40)) * 10),
            "capacity": int(rng.integers(1, 6)),
        })
    return KnowledgeBase(flights, hotels)


def save_kb(kb, path, meta=None):
    obj = kb.to_json()
    if meta:
        obj["meta"] = meta
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_kb(path):
    with open(path) as fh:
        return KnowledgeBase.from_json(json.load(fh))
