"""Estimator surface: sklearn conventions, fit/save/load, streaming."""

import numpy as np
import pytest
from sklearn.base import clone

from sgrl.subgoal.estimator import SubgoalDiscoveryNetwork
from sgrl.subgoal.stream import TerminationStream


def _tiny_corpus(n=14, T=6, W=9, seed=0):
    rng = np.random.default_rng(seed)
    return [(rng.random((T + 1, W)) < 0.4).astype(float) for _ in range(n)]


def _tiny_fit(**kw):
    args = dict(latent_slots=2, hidden_size=5, max_segments=3, batch_size=4,
                max_steps=40, eval_every=20, seed=3)
    args.update(kw)
    est = SubgoalDiscoveryNetwork(**args)
    est.fit(_tiny_corpus())
    return est


def test_sklearn_params_round_trip():
    est = SubgoalDiscoveryNetwork(latent_slots=3, max_steps=10)
    params = est.get_params()
    assert params["latent_slots"] == 3
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(hidden_size=7)
    assert est.get_params()["hidden_size"] == 7


def test_fit_sets_artifacts_and_improves():
    est = _tiny_fit()
    assert est.n_features_in_ == 9
    assert hasattr(est, "model_")
    hist = est.history_
    assert hist[-1]["step"] >= hist[0]["step"]
    # training should not make held-out likelihood worse
    assert hist[-1]["val_ll"] >= hist[0]["val_ll"] - 0.5


def test_fit_deterministic():
    a = _tiny_fit()
    b = _tiny_fit()
    traj = _tiny_corpus(1, seed=9)[0]
    assert a.score([traj]) == b.score([traj])


def test_predict_and_segment_shapes():
    est = _tiny_fit()
    trajs = _tiny_corpus(3, seed=5)
    cuts = est.predict(trajs)
    assert len(cuts) == 3
    for bounds, traj in zip(cuts, trajs):
        T = len(traj) - 1
        assert bounds[0] == 0 and bounds[-1] == T
        assert all(0 < b < T for b in bounds[1:-1])
        assert len(bounds) - 1 <= est.max_segments
    bounds, labels = est.segment(trajs[0])
    assert bounds == cuts[0]
    assert len(labels) == len(bounds) - 1
    assert all(0 <= g < est.latent_slots for g in labels)


def test_width_mismatch_rejected():
    est = _tiny_fit()
    with pytest.raises(ValueError):
        est.score([np.zeros((5, 4))])


def test_save_load_round_trip(tmp_path):
    est = _tiny_fit()
    path = str(tmp_path / "sdn.npz")
    est.save(path, extra_meta={"tag": "t"})
    again = SubgoalDiscoveryNetwork.load(path)
    assert again.get_params() == est.get_params()
    trajs = _tiny_corpus(2, seed=11)
    assert again.score(trajs) == pytest.approx(est.score(trajs), abs=1e-12)
    assert again.predict(trajs) == est.predict(trajs)


def test_stream_probabilities_valid_and_resettable():
    est = _tiny_fit()
    traj = _tiny_corpus(1, seed=13)[0]
    stream = TerminationStream(est.model_, threshold=0.5)
    stream.start(traj[0])
    probs = []
    for s in traj[1:]:
        p = stream.push(s)
        probs.append(p)
        assert 0.0 <= p <= 1.0
        if p >= 0.5:
            label = stream.latent_label()
            assert 0 <= label < est.latent_slots
            stream.reset_segment()
    # restarting reproduces the same probabilities
    stream.start(traj[0])
    again = []
    for s in traj[1:]:
        p = stream.push(s)
        again.append(p)
        if p >= 0.5:
            stream.reset_segment()
    assert probs == again
