"""Episode rollouts and successful-trajectory collection.

Trajectory datasets are JSON Lines, one dialogue per line:
{goal, acts, states, rewards, success, seed}. `states` holds the featurized
state after every turn with the fresh state prepended, so a dialogue of T
turns carries T+1 vectors. `rewards` is per turn with the terminal bonus
folded into the final entry, making sum(rewards) the episode total.
"""

import json

import numpy as np

from ..dialog.schema import DialogueAct
from ..sim.env import EpisodeOutcome
from ..sim.goals import UserGoal


def episode_rng(master_seed, episode_index):
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(episode_index)]))


def roll_episode(env, policy, rng, seed=None, record=True):
    """Run one dialogue with a simulated user. Returns an EpisodeOutcome."""
    state, vec = env.reset(rng)
    policy.reset()
    states = [vec] if record else None
    acts = [] if record else None
    rewards = [] if record else None
    total = 0
    while not env.done:
        action = policy.select(state, vec, rng)
        res = env.step(env.act_from_index(action, state))
        state, vec = res.state, res.vec
        total += res.reward
        if record:
            states.extend(res.line_vecs)
            acts.extend(res.acts)
            step_lines = [-1] * res.lines_added
            step_lines[-1] += res.reward + res.lines_added  # terminal bonus, if any
            rewards.extend(step_lines)
    return EpisodeOutcome(success=res.success, turns=env.lines, reward=total,
                          reason=res.reason, goal=env.goal, acts=acts,
                          states=states, rewards=rewards, seed=seed)


def collect_successes(env, policy, n_target, master_seed, max_episodes=None):
    """Roll dialogues until n_target successes are recorded.

    Episode k uses an rng derived from (master_seed, k), so the collected
    set is a pure function of the seed and environment configuration.
    """
    if max_episodes is None:
        max_episodes = 100 * n_target
    out, attempts = [], 0
    while len(out) < n_target:
        if attempts >= max_episodes:
            raise RuntimeError(
                "only %d successes in %d episodes" % (len(out), attempts))
        ep = roll_episode(env, policy, episode_rng(master_seed, attempts),
                          seed=attempts)
        attempts += 1
        if ep.success:
            out.append(ep)
    return out, attempts


def split_dataset(episodes, train_frac=0.8, seed=0):
    """Deterministic shuffled split; sizes are floor(n*frac) / remainder."""
    idx = np.random.default_rng(
        np.random.SeedSequence([int(seed), 0x51])).permutation(len(episodes))
    n_train = int(len(episodes) * train_frac)
    train = [episodes[i] for i in idx[:n_train]]
    val = [episodes[i] for i in idx[n_train:]]
    return train, val


def episode_to_json(ep):
    return {
        "goal": ep.goal.to_json(),
        "acts": [a.to_json() for a in ep.acts],
        "states": [[float(x) for x in v] for v in ep.states],
        "rewards": [int(r) for r in ep.rewards],
        "success": bool(ep.success),
        "seed": int(ep.seed) if ep.seed is not None else None,
    }


def episode_from_json(obj):
    return EpisodeOutcome(
        success=obj["success"], turns=len(obj["acts"]),
        reward=int(sum(obj["rewards"])), reason=None,
        goal=UserGoal.from_json(obj["goal"]),
        acts=[DialogueAct.from_json(a) for a in obj["acts"]],
        states=[np.array(v) for v in obj["states"]],
        rewards=list(obj["rewards"]), seed=obj.get("seed"))


def save_dataset(episodes, path, meta=None):
    with open(path, "w") as fh:
        if meta:
            fh.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for ep in episodes:
            fh.write(json.dumps(episode_to_json(ep), sort_keys=True) + "\n")


def load_dataset(path):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                if "goal" in obj:
                    out.append(episode_from_json(obj))
    return out
