"""Finite-difference gradient checking for tape-computed gradients."""

import numpy as np

from .tensor import Tape


class GradCheckError(RuntimeError):
    pass


def grad_check(f, params, eps=1e-5, max_entries=None, rng=None):
    """Compare analytic gradients of scalar f() against central differences.

    f is a no-argument callable evaluating the loss from the current values
    of `params` (a list of kernel Tensors). Returns the maximum over checked
    entries of |analytic - fd| / max(1, |analytic|).

    max_entries limits how many coordinates per parameter are probed (chosen
    with `rng` when set); None checks every coordinate.
    """
    with Tape() as tape:
        loss = f()
    if not np.isfinite(loss.data):
        raise GradCheckError("non-finite loss %r" % loss.data)
    analytic = tape.backward(loss, params)

    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        idxs = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            assert rng is not None, "rng required when subsampling entries"
            idxs = rng.choice(flat.size, size=max_entries, replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + eps
            hi = float(f().data)
            flat[i] = orig - eps
            lo = float(f().data)
            flat[i] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise GradCheckError("non-finite loss during perturbation")
            fd = (hi - lo) / (2.0 * eps)
            err = abs(gflat[i] - fd) / max(1.0, abs(gflat[i]))
            if err > worst:
                worst = err
    return worst
