"""Fixed-width numeric view of a TrackerState.

Layout (width 91, all components in [0, 1]):

    [0:8)    last user act type, one-hot over ACT_TYPES (none -> zeros)
    [8:16)   last agent act type, one-hot
    [16:64)  per-slot fill status, 3 bits per slot in ALL_SLOTS order:
             [user-informed, agent-informed, confirmed] one-hot of the level
    [64:80)  per-slot pending-user-request bits
    [80]     turn index scaled by the turn cap, clipped to 1
    [81:89)  KB match-count buckets {0, 1, 2-4, >=5}, flight then hotel
    [89:91)  booking status bits, flight then hotel
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .schema import ACT_TYPES, ALL_SLOTS, SUBTASKS

WIDTH = 16 + 3 * len(ALL_SLOTS) + len(ALL_SLOTS) + 1 + 8 + 2

_ACT_INDEX = {a: i for i, a in enumerate(ACT_TYPES)}
_SLOT_INDEX = {s: i for i, s in enumerate(ALL_SLOTS)}

_STATUS_BASE = 16
_REQUEST_BASE = _STATUS_BASE + 3 * len(ALL_SLOTS)
_TURN_POS = _REQUEST_BASE + len(ALL_SLOTS)
_KB_BASE = _TURN_POS + 1
_BOOK_BASE = _KB_BASE + 8


def _bucket(n):
    if n <= 0:
        return 0
    if n == 1:
        return 1
    if n <= 4:
        return 2
    return 3


def featurize(state, turn_cap=60):
    """TrackerState -> float64 vector of WIDTH components in [0, 1]."""
    v = np.zeros(WIDTH)
    if state.last_user_act is not None:
        v[_ACT_INDEX[state.last_user_act]] = 1.0
    if state.last_agent_act is not None:
        v[8 + _ACT_INDEX[state.last_agent_act]] = 1.0
    for slot, level in state.status.items():
        if level >= 1:
            v[_STATUS_BASE + 3 * _SLOT_INDEX[slot] + (level - 1)] = 1.0
    for slot in state.requested:
        v[_REQUEST_BASE + _SLOT_INDEX[slot]] = 1.0
    v[_TURN_POS] = min(state.turn / float(turn_cap), 1.0)
    for k, n in enumerate(state.kb_counts):
        v[_KB_BASE + 4 * k + _bucket(n)] = 1.0
    for k, st in enumerate(SUBTASKS):
        if st in state.booked:
            v[_BOOK_BASE + k] = 1.0
    return v


def feature_names():
    names = ["last_user=%s" % a for a in ACT_TYPES]
    names += ["last_agent=%s" % a for a in ACT_TYPES]
    for s in ALL_SLOTS:
        names += ["%s=user_informed" % s, "%s=agent_informed" % s, "%s=confirmed" % s]
    names += ["requested:%s" % s for s in ALL_SLOTS]
    names.append("turn_scaled")
    for st in SUBTASKS:
        names += ["kb_%s=%s" % (st, b) for b in ("0", "1", "2-4", "5+")]
    names += ["booked:%s" % st for st in SUBTASKS]
    assert len(names) == WIDTH
    return names


class StateFeaturizer(BaseEstimator, TransformerMixin):
    """Transformer wrapper over featurize() for batches of TrackerStates."""

    def __init__(self, turn_cap=60):
        self.turn_cap = turn_cap

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.stack([featurize(s, self.turn_cap) for s in X], axis=0) \
            if len(X) else np.zeros((0, WIDTH))
