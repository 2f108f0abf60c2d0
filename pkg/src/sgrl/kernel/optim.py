"""RMSProp with optional global-norm gradient clipping."""

import numpy as np


def clip_global_norm(grads, max_norm):
    """Scale the whole gradient set so its global L2 norm is <= max_norm.

    Returns (possibly rescaled) list plus the pre-clip norm.
    """
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if max_norm is None or norm <= max_norm or norm == 0.0:
        return list(grads), norm
    factor = max_norm / norm
    return [g * factor for g in grads], norm


class RmsProp:
    """param <- param - lr * g / sqrt(acc + eps), acc <- rho*acc + (1-rho)*g^2."""

    def __init__(self, params, lr=1e-3, rho=0.9, eps=1e-8, clip_norm=5.0):
        # params: list of kernel Tensors updated in place
        self.params = list(params)
        self.lr = lr
        self.rho = rho
        self.eps = eps
        self.clip_norm = clip_norm
        self.acc = [np.zeros_like(p.data) for p in self.params]

    def step(self, grads):
        assert len(grads) == len(self.params)
        grads, norm = clip_global_norm(grads, self.clip_norm)
        for p, a, g in zip(self.params, self.acc, grads):
            a *= self.rho
            a += (1.0 - self.rho) * g * g
            p.data -= self.lr * g / np.sqrt(a + self.eps)
        return norm
