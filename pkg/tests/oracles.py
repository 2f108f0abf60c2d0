"""Independent reference implementations used to pin down the fast paths.

Everything here is deliberately naive: plain numpy, no shared code with the
package's autodiff kernel or batched forwards. Loops over candidates, one
at a time.
"""

import itertools

import numpy as np


def logsumexp(xs):
    xs = np.asarray(xs, dtype=np.float64)
    m = np.max(xs)
    if not np.isfinite(m):
        return m
    return m + np.log(np.sum(np.exp(xs - m)))


def enumeration_log_likelihood(seg, max_segments):
    """Sum segment-product probabilities over all segmentations, brute force.

    seg[t, i] = log prob of segment (i, t]; boundaries 0..T.
    """
    T = seg.shape[0] - 1
    totals = []
    for m in range(1, max_segments + 1):
        for interior in itertools.combinations(range(1, T), m - 1):
            bounds = (0,) + interior + (T,)
            ll = 0.0
            for a, b in zip(bounds, bounds[1:]):
                ll += seg[b, a]
            totals.append(ll)
    return logsumexp(totals)


def enumeration_expected_segments(seg, max_segments):
    """Posterior mean segment count under the same enumeration."""
    T = seg.shape[0] - 1
    lls, counts = [], []
    for m in range(1, max_segments + 1):
        for interior in itertools.combinations(range(1, T), m - 1):
            bounds = (0,) + interior + (T,)
            ll = 0.0
            for a, b in zip(bounds, bounds[1:]):
                ll += seg[b, a]
            lls.append(ll)
            counts.append(m)
    total = logsumexp(lls)
    return float(sum(c * np.exp(ll - total) for c, ll in zip(counts, lls)))


def enumeration_best_boundaries(seg, max_segments):
    """Argmax segmentation by brute force; ties to fewer, earlier cuts."""
    T = seg.shape[0] - 1
    best, best_ll = None, -np.inf
    for m in range(1, max_segments + 1):
        for interior in itertools.combinations(range(1, T), m - 1):
            bounds = (0,) + interior + (T,)
            ll = sum(seg[b, a] for a, b in zip(bounds, bounds[1:]))
            if ll > best_ll + 1e-12:
                best, best_ll = list(bounds), ll
    return best


# -- plain numpy mirror of the segment scorer -------------------------------


def _np_sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _np_softplus(x):
    return np.logaddexp(0.0, x)


def _np_lstm_step(wx, wh, b, x, h, c):
    gates = x @ wx + h @ wh + b
    H = h.shape[-1]
    i = _np_sigmoid(gates[..., 0:H])
    f = _np_sigmoid(gates[..., H:2 * H])
    o = _np_sigmoid(gates[..., 2 * H:3 * H])
    g = np.tanh(gates[..., 3 * H:4 * H])
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


def reference_segment_score(arrays, traj, i, t):
    """Log prob of segment (i, t] scored one input at a time.

    `arrays` is the model's name -> ndarray dict. The decoder consumes the
    boundary-i subgoal mixture embedding, then s_{i+1} .. s_t; continue
    terms accrue at every step before t and the stop term at t.
    """
    traj = np.asarray(traj, dtype=np.float64)
    H = arrays["history.wh"].shape[0]
    h = np.zeros(H)
    c = np.zeros(H)
    for k in range(i + 1):
        h, c = _np_lstm_step(arrays["history.wx"], arrays["history.wh"],
                             arrays["history.b"], traj[k], h, c)
    logits = h @ arrays["latent.w"] + arrays["latent.b"]
    p = np.exp(logits - logsumexp(logits))
    init = p @ arrays["embed"]

    h = np.zeros(H)
    c = np.zeros(H)
    ll = 0.0
    inputs = [init] + [traj[k] for k in range(i + 1, t + 1)]
    for step, x in enumerate(inputs):
        h, c = _np_lstm_step(arrays["segment.wx"], arrays["segment.wh"],
                             arrays["segment.b"], x, h, c)
        zs = float(h @ arrays["stop.w"] + arrays["stop.b"][0])
        at_end = step == len(inputs) - 1
        if at_end:
            ll += -_np_softplus(-zs)          # log p(stop)
        else:
            target = traj[i + 1 + step]
            z = h @ arrays["emit.w"] + arrays["emit.b"]
            ll += -_np_softplus(zs)           # log p(continue)
            ll += float(np.sum(target * z - _np_softplus(z)))
    return ll
