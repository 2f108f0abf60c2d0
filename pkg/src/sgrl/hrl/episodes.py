"""Rollout loops for the flat and hierarchical dialogue agents.

The flat agent maps states straight to primitive actions. The hierarchical
agents pick a subgoal at the top level, then act through the low-level net
conditioned on that subgoal until the option terminates: for the subtask
hierarchy, when the chosen subtask's booking is done; for the discovered
hierarchy, when the termination stream's stop probability first crosses its
threshold inside a step (at most one boundary per step). Subtask options
carry initiation sets: a subtask already booked cannot be picked again
while any other remains open.

Rewards: the environment's extrinsic reward goes to the top level as a
discounted option return; the low level trains on intrinsic rewards of -1
per dialogue line, a completion bonus when its option terminates by
success, and an extra -1 if the episode ends with the option still open.

The optional choose_action / choose_goal callables override the
epsilon-greedy picks; warm-start collection drives these same loops with
the scripted policy so the stored tuples are built identically.
"""

from dataclasses import dataclass

import numpy as np

from ..dialog.schema import SUBTASKS
from .nets import goal_input
from .replay import OptionTuple, StepTuple


@dataclass
class EpisodeStats:
    success: bool
    turns: int
    reward: float          # extrinsic total
    intrinsic: float       # low-level total, 0 for the flat agent
    steps: int
    options: int
    completions: int
    reason: str


def _pick(values, eps, rng):
    if eps > 0.0 and rng.random() < eps:
        return int(rng.integers(0, len(values)))
    return int(np.argmax(values))


def run_flat_episode(env, net, eps, rng, goal=None, buffer=None,
                     choose_action=None):
    state, vec = env.reset(rng, goal=goal)
    total = 0.0
    steps = 0
    while True:
        if choose_action is not None:
            a = choose_action(state, vec)
        else:
            a = _pick(net.values(vec), eps, rng)
        res = env.step(env.act_from_index(a, state))
        if buffer is not None:
            buffer.add(StepTuple(vec, a, None, res.vec, res.reward, res.done))
        total += res.reward
        steps += 1
        state, vec = res.state, res.vec
        if res.done:
            return EpisodeStats(res.success, env.lines, total, 0.0, steps,
                                0, 0, res.reason)


def run_subtask_episode(env, top, low, eps, rng, gamma, goal=None,
                        option_buffer=None, step_buffer=None, bonus=60.0,
                        choose_action=None, choose_goal=None):
    """One episode of the two-level agent over the fixed subtask hierarchy."""
    state, vec = env.reset(rng, goal=goal)
    total = intr = 0.0
    steps = options = completions = 0
    done = False
    res = None
    while not done:
        if choose_goal is not None:
            g = choose_goal(state, vec)
        else:
            # initiation sets: an already-booked subtask is not available,
            # otherwise top-level churn floods the buffers with degenerate
            # one-step options
            avail = [i for i, name in enumerate(SUBTASKS)
                     if name not in state.booked]
            if not avail:
                avail = list(range(len(SUBTASKS)))
            if eps > 0.0 and rng.random() < eps:
                g = int(avail[rng.integers(0, len(avail))])
            else:
                vals = top.values(vec)
                g = int(max(avail, key=lambda i: vals[i]))
        start_vec = vec
        opt_ret = 0.0
        k = 0
        options += 1
        while True:
            if choose_action is not None:
                a = choose_action(state, vec)
            else:
                a = _pick(low.values(goal_input(vec, g, len(SUBTASKS))),
                          eps, rng)
            res = env.step(env.act_from_index(a, state))
            was_booked = SUBTASKS[g] in state.booked
            now_booked = SUBTASKS[g] in res.state.booked
            completed = now_booked and not was_booked
            # terminate on a fresh booking only: once every subtask is
            # booked the current option carries the wrap-up phase to the
            # end of the episode, so its step targets keep bootstrapping
            # instead of collapsing into one-step terminal tuples
            opt_end = completed or res.done
            r_i = -float(res.lines_added)
            if completed:
                completions += 1
                r_i += bonus
            elif res.done:
                r_i -= 1.0          # episode over, option left open
            if step_buffer is not None:
                step_buffer.add(StepTuple(vec, a, g, res.vec, r_i, opt_end))
            opt_ret += gamma ** k * res.reward
            k += 1
            total += res.reward
            intr += r_i
            steps += 1
            state, vec = res.state, res.vec
            done = res.done
            if opt_end:
                break
        if option_buffer is not None:
            option_buffer.add(OptionTuple(start_vec, g, vec, opt_ret, k, done))
    return EpisodeStats(res.success, env.lines, total, intr, steps,
                        options, completions, res.reason)


def run_discovered_episode(env, top, low, stream, eps, rng, gamma, goal=None,
                           option_buffer=None, step_buffer=None, bonus=30.0,
                           n_goals=4, choose_action=None, choose_goal=None):
    """One episode with discovered subgoals and the learned termination."""
    state, vec = env.reset(rng, goal=goal)
    stream.start(vec)
    total = intr = 0.0
    steps = options = completions = 0
    done = False
    res = None
    while not done:
        if choose_goal is not None:
            g = choose_goal(state, vec)
        else:
            g = _pick(top.values(vec), eps, rng)
        start_vec = vec
        opt_ret = 0.0
        k = 0
        options += 1
        while True:
            if choose_action is not None:
                a = choose_action(state, vec)
            else:
                a = _pick(low.values(goal_input(vec, g, n_goals)), eps, rng)
            res = env.step(env.act_from_index(a, state))
            fired = False
            for lv in res.line_vecs:
                p = stream.push(lv)
                if not fired and p >= stream.threshold:
                    fired = True
                    stream.reset_segment()
            opt_end = fired or res.done
            r_i = -float(res.lines_added)
            if fired:
                completions += 1
                r_i += bonus
            elif res.done:
                r_i -= 1.0
            if step_buffer is not None:
                step_buffer.add(StepTuple(vec, a, g, res.vec, r_i, opt_end))
            opt_ret += gamma ** k * res.reward
            k += 1
            total += res.reward
            intr += r_i
            steps += 1
            state, vec = res.state, res.vec
            done = res.done
            if opt_end:
                break
        if option_buffer is not None:
            option_buffer.add(OptionTuple(start_vec, g, vec, opt_ret, k, done))
    return EpisodeStats(res.success, env.lines, total, intr, steps,
                        options, completions, res.reason)
