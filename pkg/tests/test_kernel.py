"""Autodiff tape: gradients of every op against finite differences."""

import numpy as np
import pytest

from sgrl.kernel import ops
from sgrl.kernel.checkpoint import (CheckpointError, load_checkpoint,
                                    save_checkpoint)
from sgrl.kernel.gradcheck import grad_check
from sgrl.kernel.lstm import LstmCell
from sgrl.kernel.optim import RmsProp, clip_global_norm
from sgrl.kernel.tensor import Parameter, Tape, Tensor

RNG = np.random.default_rng(0xC0FFEE)


def _param(*shape):
    return Parameter(RNG.standard_normal(shape))


def test_elementwise_ops_gradients():
    a = _param(4, 3)
    b = _param(4, 3)

    def loss():
        x = ops.add(ops.mul(a, b), ops.sub(a, ops.scale(b, 0.7)))
        x = ops.add(ops.tanh(x), ops.sigmoid(ops.neg(x)))
        x = ops.add(x, ops.softplus(ops.square(a)))
        return ops.tsum(ops.relu(x))

    assert grad_check(loss, [a, b]) < 1e-6


def test_matmul_softmax_gradients():
    w = _param(5, 4)
    x = _param(3, 5)

    def loss():
        z = ops.softmax(ops.matmul(x, w))
        return ops.tsum(ops.square(z))

    assert grad_check(loss, [w, x]) < 1e-6


def test_row_surgery_gradients():
    a = _param(4, 3)
    b = _param(2, 3)

    def loss():
        rows = ops.concat_rows([ops.slice_rows(a, 1, 3), b])
        stacked = ops.cumsum_rows(rows)
        padded = ops.pad_rows(ops.tsum(stacked, axis=1), 6)
        return ops.tsum(ops.square(padded))

    assert grad_check(loss, [a, b]) < 1e-6


def test_take_per_row_and_mean_gradients():
    q = _param(6, 5)
    idx = np.array([0, 3, 2, 4, 1, 1])

    def loss():
        return ops.tmean(ops.square(ops.take_per_row(q, idx)))

    assert grad_check(loss, [q]) < 1e-6


def test_lstm_step_gradients():
    cell = LstmCell(4, 3, rng=np.random.default_rng(1))
    x = _param(2, 4)
    h0 = _param(2, 3)
    c0 = _param(2, 3)

    def loss():
        h, c = cell.step(x, h0, c0)
        h, c = cell.step(x, h, c)
        return ops.tsum(ops.add(ops.square(h), ops.square(c)))

    params = list(cell.params().values()) + [x, h0, c0]
    assert grad_check(loss, params) < 1e-5


def test_gradients_accumulate_across_reuse():
    a = _param(3, 3)

    def loss():
        return ops.tsum(ops.mul(a, a))

    with Tape() as tape:
        val = loss()
    (g,) = tape.backward(val, [a])
    np.testing.assert_allclose(g, 2 * a.data, rtol=1e-12)


def test_no_grad_outside_tape():
    a = _param(2, 2)
    out = ops.tsum(ops.square(a))    # no active tape: plain forward
    assert isinstance(out, Tensor)
    assert np.isfinite(out.data)


def test_rmsprop_descends_quadratic():
    p = Parameter(np.array([3.0, -2.0]))
    opt = RmsProp([p], lr=0.05)
    for _ in range(200):
        with Tape() as tape:
            loss = ops.tsum(ops.square(p))
        grads = tape.backward(loss, [p])
        opt.step(grads)
    assert np.all(np.abs(p.data) < 0.05)


def test_clip_global_norm():
    gs = [np.full(4, 10.0), np.full(2, -10.0)]
    clipped, before = clip_global_norm(gs, 1.0)
    assert before > 1.0
    total = np.sqrt(sum(np.sum(g * g) for g in clipped))
    assert np.isclose(total, 1.0)
    gs2 = [np.array([0.1, 0.1])]
    same, _ = clip_global_norm(gs2, 1.0)
    np.testing.assert_allclose(same[0], gs2[0])


def test_checkpoint_round_trip(tmp_path):
    params = {"w": RNG.standard_normal((3, 4)), "b": np.zeros(4)}
    path = tmp_path / "net.npz"
    save_checkpoint(path, "FLATQ", params, metadata={"note": "x"})
    kind, arrays, meta = load_checkpoint(path)
    assert kind == "FLATQ"
    assert meta["note"] == "x"
    np.testing.assert_array_equal(arrays["w"], params["w"])


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.npz"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
