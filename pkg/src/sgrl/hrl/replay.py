"""Experience buffers for the dialogue agents.

Two tuple shapes: option-level transitions for the top-level net (state at
option start, subgoal, state at option end, discounted extrinsic return
over the option, option length in agent steps, episode-terminal flag) and
step-level transitions for the low-level / flat nets (state, action,
subgoal or None, next state, reward, segment-terminal flag).

Training makes one pass over the buffer per epoch in insertion order, so
the buffers are plain FIFO deques.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass
class OptionTuple:
    state: np.ndarray
    goal: int
    next_state: np.ndarray
    ret: float
    steps: int
    terminal: bool


@dataclass
class StepTuple:
    state: np.ndarray
    action: int
    goal: object          # int subgoal, or None for the flat agent
    next_state: np.ndarray
    reward: float
    done: bool


class ReplayBuffer:
    def __init__(self, capacity=10000):
        self.items = deque(maxlen=capacity)

    def add(self, item):
        self.items.append(item)

    def __len__(self):
        return len(self.items)

    def batches(self, batch_size):
        """Insertion-order minibatches, one pass."""
        chunk = []
        for item in self.items:
            chunk.append(item)
            if len(chunk) == batch_size:
                yield chunk
                chunk = []
        if chunk:
            yield chunk
