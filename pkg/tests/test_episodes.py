"""Episode runners: reward bookkeeping and option scheduling."""

import numpy as np

from sgrl.dialog.featurizer import WIDTH, feature_names
from sgrl.dialog.schema import NUM_ACTIONS, SUBTASKS
from sgrl.hrl.episodes import (run_discovered_episode, run_flat_episode,
                               run_subtask_episode)
from sgrl.hrl.nets import QMlp
from sgrl.hrl.replay import ReplayBuffer
from sgrl.dialog.kb import generate_kb
from sgrl.sim.env import DialogueEnv
from sgrl.subgoal.estimator import SubgoalDiscoveryNetwork
from sgrl.subgoal.stream import TerminationStream

L = 60


def _env():
    return DialogueEnv(generate_kb(7, n_flights=60, n_hotels=40), turn_cap=L)


def _flat_net(seed=0):
    return QMlp(WIDTH, NUM_ACTIONS, hidden=16, seed=seed)


def test_flat_episode_extrinsic_identity():
    env = _env()
    net = _flat_net()
    rng = np.random.default_rng(0)
    for _ in range(100):
        stats = run_flat_episode(env, net, 0.6, rng)
        bonus = 2 * L if stats.success else -L
        assert stats.reward == -stats.turns + bonus


def test_subtask_episode_accounting():
    env = _env()
    top = QMlp(WIDTH, 2, hidden=16, seed=1)
    low = QMlp(WIDTH + 2, NUM_ACTIONS, hidden=16, seed=2)
    rng = np.random.default_rng(1)
    for _ in range(100):
        stats = run_subtask_episode(env, top, low, 0.6, rng, gamma=0.95,
                                    bonus=60.0)
        extr = 2 * L if stats.success else -L
        assert stats.reward == -stats.turns + extr
        failures = stats.options - stats.completions
        assert failures in (0, 1)    # only the last option can be cut off
        assert stats.intrinsic == 60 * stats.completions - failures - stats.turns


def test_option_returns_discount_extrinsic(tmp_path):
    env = _env()
    top = QMlp(WIDTH, 2, hidden=16, seed=3)
    low = QMlp(WIDTH + 2, NUM_ACTIONS, hidden=16, seed=4)
    buf = ReplayBuffer(1000)
    rng = np.random.default_rng(2)
    gamma = 0.9
    stats = run_subtask_episode(env, top, low, 0.5, rng, gamma=gamma,
                                option_buffer=buf, bonus=60.0)
    tuples = list(buf.items)
    assert len(tuples) == stats.options
    # option lengths are counted in agent decisions, not transcript lines
    assert sum(t.steps for t in tuples) == stats.steps
    assert tuples[-1].terminal
    # undiscounted option returns recompose the extrinsic total
    total = sum(t.ret for t in tuples)
    assert abs(total) <= stats.turns + 2 * L   # sanity: bounded
    if gamma == 1.0:
        assert total == stats.reward


def test_subtask_goals_respect_initiation_sets():
    env = _env()
    top = QMlp(WIDTH, 2, hidden=16, seed=5)
    low = QMlp(WIDTH + 2, NUM_ACTIONS, hidden=16, seed=6)
    booked_idx = {name: i for i, name in enumerate(feature_names())}
    cols = [booked_idx["booked:flight"], booked_idx["booked:hotel"]]
    rng = np.random.default_rng(3)
    for _ in range(40):
        buf = ReplayBuffer(1000)
        run_subtask_episode(env, top, low, 0.7, rng, gamma=0.95,
                            option_buffer=buf, bonus=60.0)
        for tup in buf.items:
            flags = [tup.state[c] for c in cols]
            if 0.0 in flags:
                # an unbooked subtask exists, so the goal must be one
                assert flags[tup.goal] == 0.0


def test_discovered_episode_accounting():
    rng = np.random.default_rng(4)
    corpus = [(rng.random((8, WIDTH)) < 0.3).astype(float) for _ in range(10)]
    est = SubgoalDiscoveryNetwork(latent_slots=4, hidden_size=5,
                                  max_segments=4, batch_size=4, max_steps=20,
                                  eval_every=10, seed=5)
    est.fit(corpus)
    stream = TerminationStream(est.model_, threshold=0.2)
    env = _env()
    top = QMlp(WIDTH, 4, hidden=16, seed=7)
    low = QMlp(WIDTH + 4, NUM_ACTIONS, hidden=16, seed=8)
    for _ in range(30):
        stats = run_discovered_episode(env, top, low, stream, 0.6,
                                       np.random.default_rng(7), gamma=0.95,
                                       bonus=30.0)
        extr = 2 * L if stats.success else -L
        assert stats.reward == -stats.turns + extr
        failures = stats.options - stats.completions
        assert failures in (0, 1)
        assert stats.intrinsic == 30 * stats.completions - failures - stats.turns
