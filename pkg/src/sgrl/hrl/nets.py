"""Q-value MLPs for the flat and hierarchical agents.

One hidden tanh layer of width 80 throughout; the bounded activations keep
bootstrapped value fitting from running away. The top-level net maps a
state to subgoal values; the low-level net maps state plus a one-hot
subgoal to primitive action values; the flat net maps state to primitive
action values directly.
"""

import numpy as np

from ..kernel import ops
from ..kernel.checkpoint import load_checkpoint, save_checkpoint
from ..kernel.tensor import Parameter, Tensor


class QMlp:
    def __init__(self, input_dim, output_dim, hidden=80, seed=0, name="q"):
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.hidden = hidden
        self.name = name
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x51AB]))
        k1 = np.sqrt(6.0 / (input_dim + hidden))
        k2 = np.sqrt(6.0 / (hidden + output_dim))
        self.w1 = Parameter(rng.uniform(-k1, k1, (input_dim, hidden)), name + ".w1")
        self.b1 = Parameter(np.zeros(hidden), name + ".b1")
        self.w2 = Parameter(rng.uniform(-k2, k2, (hidden, output_dim)), name + ".w2")
        self.b2 = Parameter(np.zeros(output_dim), name + ".b2")

    def params(self):
        return {p.name: p for p in (self.w1, self.b1, self.w2, self.b2)}

    def param_list(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def forward(self, x):
        """x: (B, input_dim) or (input_dim,) tensor/array -> Q values."""
        h = ops.tanh(ops.add(ops.matmul(x, self.w1), self.b1))
        return ops.add(ops.matmul(h, self.w2), self.b2)

    def values(self, x):
        """Plain ndarray of Q values, no tape."""
        return self.forward(Tensor(np.asarray(x, dtype=np.float64))).data

    def state_arrays(self):
        return {k: v.data.copy() for k, v in self.params().items()}

    def load_state(self, arrays):
        params = self.params()
        for name, value in arrays.items():
            if name not in params:
                raise ValueError("unknown parameter %s" % name)
            if params[name].data.shape != value.shape:
                raise ValueError("shape mismatch for %s" % name)
            params[name].data = np.asarray(value, dtype=np.float64)

    def clone_arrays(self):
        """Frozen snapshot for target computation."""
        return {k: v.copy() for k, v in self.state_arrays().items()}

    def values_from(self, arrays, x):
        """Q values under a parameter snapshot, plain numpy."""
        x = np.asarray(x, dtype=np.float64)
        h = np.tanh(x @ arrays[self.name + ".w1"] + arrays[self.name + ".b1"])
        return h @ arrays[self.name + ".w2"] + arrays[self.name + ".b2"]

    def save(self, path, kind, metadata=None):
        meta = dict(metadata or {})
        meta.update({"input_dim": self.input_dim, "output_dim": self.output_dim,
                     "hidden": self.hidden, "name": self.name})
        save_checkpoint(path, kind, self.state_arrays(), meta)

    @classmethod
    def load(cls, path, expect_kind=None):
        kind, arrays, meta = load_checkpoint(path)
        if expect_kind is not None and kind != expect_kind:
            raise ValueError("expected %s checkpoint, got %s" % (expect_kind, kind))
        net = cls(int(meta["input_dim"]), int(meta["output_dim"]),
                  hidden=int(meta["hidden"]), name=meta.get("name", "q"))
        net.load_state(arrays)
        return net


def goal_input(vec, goal, n_goals):
    """Concatenate a state vector with a one-hot subgoal."""
    out = np.zeros(len(vec) + n_goals)
    out[:len(vec)] = vec
    out[len(vec) + goal] = 1.0
    return out
