"""Q-learning targets against frozen parameter snapshots."""

import numpy as np


def option_target(net, frozen, tup, gamma):
    """Top-level target: R + gamma^k max_g Q(s', g), or R at episode end."""
    if tup.terminal:
        return tup.ret
    q = net.values_from(frozen, tup.next_state)
    return tup.ret + gamma ** tup.steps * float(np.max(q))


def step_target(net, frozen, tup, gamma, input_fn=None):
    """Low-level / flat target: r + gamma max_a Q(s', a), or r at the end.

    `input_fn` maps (next_state, goal) to the net input; identity on the
    state for the flat agent.
    """
    if tup.done:
        return tup.reward
    x = tup.next_state if input_fn is None else input_fn(tup.next_state, tup.goal)
    q = net.values_from(frozen, x)
    return tup.reward + gamma * float(np.max(q))
