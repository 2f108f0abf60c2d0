"""Exact segmentation likelihood by dynamic programming.

For a segment score matrix seg[t, i] = log p(segment (i, t]) over boundaries
0..T, the likelihood sums the products of segment probabilities over every
segmentation of the trajectory into at most `max_segments` parts:

    A[0][0] = 0
    A[m][t] = logsumexp_i ( A[m-1][i] + seg[t][i] ),  i < t
    log L   = logsumexp_m A[m][T],  m = 1 .. max_segments

The whole recursion is one taped op. Its backward is the matching
inside-outside pass, also in log space: with B[m][t] the log weight of all
ways to finish from boundary t having used m segments,

    d logL / d seg[t][i] = exp( seg[t][i] - logL
                                + logsumexp_m ( A[m-1][i] + B[m][t] ) )

so the gradient over all cells sums to the posterior expected number of
segments.
"""

import numpy as np

from ..kernel.tensor import as_tensor, _emit


class EvalCounter:
    """Counts candidate-segment evaluations done by the likelihood DP."""

    def __init__(self):
        self.count = 0

    def add(self, n):
        self.count += n


def exact_log_likelihood(seg, max_segments, counter=None):
    """Log likelihood of one trajectory from its segment score matrix.

    `seg` is the (T+1, T) tensor from SegmentModel.segment_matrix; only the
    cells with i < t are read. Returns a scalar tensor on the tape.
    """
    seg_t = as_tensor(seg)
    data = seg_t.data
    T = data.shape[0] - 1
    S = int(max_segments)
    if S < 1:
        raise ValueError("max_segments must be >= 1")

    A = np.full((S + 1, T + 1), -np.inf)
    A[0, 0] = 0.0
    for m in range(1, S + 1):
        for t in range(1, T + 1):
            A[m, t] = np.logaddexp.reduce(A[m - 1, :t] + data[t, :t])
            if counter is not None:
                counter.add(t)
    out = np.logaddexp.reduce(A[1:, T])

    def vjp(go):
        B = np.full((S + 1, T + 1), -np.inf)
        B[1:, T] = 0.0
        for t in range(T - 1, 0, -1):
            for m in range(S - 1, 0, -1):
                B[m, t] = np.logaddexp.reduce(B[m + 1, t + 1:] + data[t + 1:, t])
        grad = np.zeros_like(data)
        for t in range(1, T + 1):
            w = np.full(t, -np.inf)
            for m in range(1, S + 1):
                w = np.logaddexp(w, A[m - 1, :t] + B[m, t])
            grad[t, :t] = np.exp(data[t, :t] - out + w)
        return (go * grad,)

    return _emit(np.float64(out), (seg_t,), vjp, seg_t.watched)


def viterbi_boundaries(seg_data, max_segments):
    """Most likely segmentation: boundary list [0, b_1, .., T].

    Ties break toward the earlier start boundary and the smaller segment
    count, so the result is deterministic.
    """
    data = np.asarray(seg_data)
    T = data.shape[0] - 1
    S = int(max_segments)
    V = np.full((S + 1, T + 1), -np.inf)
    V[0, 0] = 0.0
    back = np.zeros((S + 1, T + 1), dtype=np.int64)
    for m in range(1, S + 1):
        for t in range(1, T + 1):
            cand = V[m - 1, :t] + data[t, :t]
            i = int(np.argmax(cand))
            V[m, t] = cand[i]
            back[m, t] = i
    best_m = 1 + int(np.argmax(V[1:, T]))
    bounds = [T]
    m, t = best_m, T
    while m > 0:
        t = int(back[m, t])
        bounds.append(t)
        m -= 1
    return bounds[::-1]
