"""LSTM cell built from kernel ops, so BPTT falls out of the tape."""

import numpy as np

from . import ops
from .tensor import Parameter, Tensor, as_tensor


class LstmCell:
    """Single-layer LSTM cell with fused gate weights.

    Gate order inside the fused matrices is input | forget | output | candidate.
    wx: (input_size, 4H), wh: (H, 4H), b: (4H,).
    """

    def __init__(self, input_size, hidden_size, rng=None, name="lstm"):
        self.input_size = input_size
        self.hidden_size = hidden_size
        k = 1.0 / np.sqrt(hidden_size)
        if rng is None:
            wx = np.zeros((input_size, 4 * hidden_size))
            wh = np.zeros((hidden_size, 4 * hidden_size))
            b = np.zeros(4 * hidden_size)
        else:
            wx = rng.uniform(-k, k, size=(input_size, 4 * hidden_size))
            wh = rng.uniform(-k, k, size=(hidden_size, 4 * hidden_size))
            b = rng.uniform(-k, k, size=4 * hidden_size)
        self.wx = Parameter(wx, name=name + ".wx")
        self.wh = Parameter(wh, name=name + ".wh")
        self.b = Parameter(b, name=name + ".b")

    def params(self):
        return {t.name: t for t in (self.wx, self.wh, self.b)}

    def step(self, x, h, c):
        """One step over a batch: x (B, in), h/c (B, H) -> (h', c')."""
        H = self.hidden_size
        gates = ops.add(ops.add(ops.matmul(x, self.wx), ops.matmul(h, self.wh)), self.b)
        i = ops.sigmoid(ops.slice_cols(gates, 0, H))
        f = ops.sigmoid(ops.slice_cols(gates, H, 2 * H))
        o = ops.sigmoid(ops.slice_cols(gates, 2 * H, 3 * H))
        g = ops.tanh(ops.slice_cols(gates, 3 * H, 4 * H))
        c_new = ops.add(ops.mul(f, c), ops.mul(i, g))
        h_new = ops.mul(o, ops.tanh(c_new))
        return h_new, c_new

    def zero_state(self, batch):
        z = np.zeros((batch, self.hidden_size))
        return Tensor(z), Tensor(z.copy())


def lstm_step(cell, x, h, c):
    """Single-vector step: x (in,), h/c (H,) -> (h', c') as (H,).

    Same arithmetic as LstmCell.step; the 1D shapes are handled natively by
    the ops so tape connectivity is preserved.
    """
    x, h, c = as_tensor(x), as_tensor(h), as_tensor(c)
    if x.data.ndim != 1:
        return cell.step(x, h, c)
    H = cell.hidden_size
    gates = ops.add(ops.add(ops.matmul(x, cell.wx), ops.matmul(h, cell.wh)), cell.b)
    i = ops.sigmoid(ops.slice_cols(gates, 0, H))
    f = ops.sigmoid(ops.slice_cols(gates, H, 2 * H))
    o = ops.sigmoid(ops.slice_cols(gates, 2 * H, 3 * H))
    g = ops.tanh(ops.slice_cols(gates, 3 * H, 4 * H))
    c_new = ops.add(ops.mul(f, c), ops.mul(i, g))
    h_new = ops.mul(o, ops.tanh(c_new))
    return h_new, c_new
