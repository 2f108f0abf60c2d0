"""State featurization: width, bounds, sklearn surface."""

import numpy as np
from sklearn.base import clone

from sgrl.dialog.featurizer import (WIDTH, StateFeaturizer, feature_names,
                                    featurize)
from sgrl.dialog.kb import generate_kb
from sgrl.dialog.schema import AGENT, USER, DialogueAct
from sgrl.dialog.tracker import DialogueTracker


def _some_states():
    tr = DialogueTracker(generate_kb(7, n_flights=60, n_hotels=40))
    s = tr.fresh()
    out = [s]
    for act in (DialogueAct(USER, "inform", {"or_city": "Lima"}),
                DialogueAct(AGENT, "request", {"dst_city": ""}),
                DialogueAct(USER, "inform", {"dst_city": "Boston"}),
                DialogueAct(USER, "request", {"price": ""}),
                DialogueAct(AGENT, "inform", {"price": "700"})):
        s = tr.track(s, act)
        out.append(s)
    return out


def test_width_and_names():
    assert len(feature_names()) == WIDTH
    assert len(set(feature_names())) == WIDTH
    for s in _some_states():
        v = featurize(s)
        assert v.shape == (WIDTH,)


def test_values_bounded():
    for s in _some_states():
        v = featurize(s)
        assert np.all(v >= 0.0) and np.all(v <= 1.0)


def test_featurize_distinguishes_states():
    states = _some_states()
    vecs = [featurize(s) for s in states]
    for a in range(len(vecs)):
        for b in range(a + 1, len(vecs)):
            assert not np.array_equal(vecs[a], vecs[b])


def test_turn_cap_scales_turn_feature():
    s = _some_states()[-1]
    full = featurize(s, turn_cap=60)
    tight = featurize(s, turn_cap=4)
    assert not np.array_equal(full, tight)


def test_transformer_surface():
    states = _some_states()
    est = StateFeaturizer(turn_cap=40)
    X = est.fit_transform(states)
    assert X.shape == (len(states), WIDTH)
    again = clone(est)
    assert again.get_params() == est.get_params()
    np.testing.assert_array_equal(again.fit_transform(states), X)
