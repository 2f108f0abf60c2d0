"""Two-RNN generative model over segmented state trajectories.

A trajectory s_0 .. s_T is modeled as a concatenation of segments. A history
encoder (LSTM over the prefix) proposes a distribution over K latent subgoal
symbols at each candidate boundary; the chosen symbol's embedding seeds a
segment decoder (second LSTM) that emits the segment's states through
per-dimension Bernoulli heads and decides when to terminate.

`segment_matrix` scores every candidate segment (i, t] of one trajectory in
a single pass: all open segment threads advance together as one growing
LSTM batch, so the tape stays O(T) nodes even though O(T^2) segments get
scored.
"""

import numpy as np

from ..kernel import ops
from ..kernel.lstm import LstmCell, lstm_step
from ..kernel.tensor import Parameter, Tensor


class SegmentModel:
    """Parameters for the history encoder and segment decoder."""

    def __init__(self, state_dim, latent_slots=4, hidden_size=50, seed=0):
        self.state_dim = state_dim
        self.latent_slots = latent_slots
        self.hidden_size = hidden_size
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5D]))
        k = 1.0 / np.sqrt(hidden_size)
        self.history = LstmCell(state_dim, hidden_size, rng, "history")
        self.w_latent = Parameter(rng.uniform(-k, k, (hidden_size, latent_slots)),
                                  "latent.w")
        self.b_latent = Parameter(np.zeros(latent_slots), "latent.b")
        # rows are the K subgoal symbols, in state space. Zero init keeps
        # every seed neutral at the start: if seeds began as random noise,
        # segmentations opening fresh segments would score far below the
        # no-cut path, their posterior weight would vanish, and mid-sequence
        # seeds would never receive gradient.
        self.embed = Parameter(np.zeros((latent_slots, state_dim)), "embed")
        self.segment = LstmCell(state_dim, hidden_size, rng, "segment")
        self.w_emit = Parameter(rng.uniform(-k, k, (hidden_size, state_dim)),
                                "emit.w")
        self.b_emit = Parameter(np.zeros(state_dim), "emit.b")
        self.w_stop = Parameter(rng.uniform(-k, k, hidden_size), "stop.w")
        self.b_stop = Parameter(np.zeros(1), "stop.b")

    def params(self):
        out = {}
        out.update(self.history.params())
        out.update(self.segment.params())
        for t in (self.w_latent, self.b_latent, self.embed,
                  self.w_emit, self.b_emit, self.w_stop, self.b_stop):
            out[t.name] = t
        return out

    def param_list(self):
        return [self.params()[k] for k in sorted(self.params())]

    def load_state(self, arrays):
        params = self.params()
        if sorted(arrays) != sorted(params):
            raise ValueError("parameter names do not match this model")
        for name, value in arrays.items():
            if params[name].data.shape != value.shape:
                raise ValueError("shape mismatch for %s" % name)
            params[name].data = np.asarray(value, dtype=np.float64)

    def state_arrays(self):
        return {k: v.data.copy() for k, v in self.params().items()}

    # -- forward pieces ---------------------------------------------------

    def latent_logits(self, traj):
        """Subgoal logits o_i for boundaries i = 0 .. T-1, shape (T, K)."""
        T = traj.shape[0] - 1
        h, c = Tensor(np.zeros(self.hidden_size)), Tensor(np.zeros(self.hidden_size))
        rows = []
        for i in range(T):
            h, c = lstm_step(self.history, Tensor(traj[i]), h, c)
            rows.append(ops.add(ops.matmul(h, self.w_latent), self.b_latent))
        return ops.stack_rows(rows)

    def segment_matrix(self, traj):
        """Log prob of every candidate segment of `traj` ((T+1, W) array).

        Returns a (T+1, T) tensor whose [t, i] entry is the log probability
        of the segment starting at boundary i and ending at boundary t,
        i.e. the decoder consumes the symbol for boundary i then s_{i+1}..s_t
        and terminates. Entries with i >= t are zero filler; callers must
        only read i < t.
        """
        traj = np.asarray(traj, dtype=np.float64)
        T = traj.shape[0] - 1
        if T < 1:
            raise ValueError("need at least one transition")
        probs = ops.softmax(self.latent_logits(traj))
        inits = ops.matmul(probs, self.embed)            # (T, W)

        zero_row = Tensor(np.zeros((1, self.hidden_size)))
        conts = []                                       # row j: cont terms
        stops = []                                       # row t: stop terms
        h = c = None
        for j in range(T):
            init_j = ops.slice_rows(inits, j, j + 1)
            if h is None:
                x, hp, cp = init_j, zero_row, zero_row
            else:
                same = Tensor(np.tile(traj[j], (j, 1)))
                x = ops.concat_rows([same, init_j])
                hp = ops.concat_rows([h, zero_row])
                cp = ops.concat_rows([c, zero_row])
            h, c = self.segment.step(x, hp, cp)          # (j+1, H)
            z = ops.add(ops.matmul(h, self.w_emit), self.b_emit)
            zs = ops.add(ops.matmul(h, self.w_stop), self.b_stop)
            target = Tensor(traj[j + 1])
            emit_ll = ops.tsum(ops.sub(ops.mul(z, target), ops.softplus(z)), axis=1)
            conts.append(ops.pad_rows(ops.sub(emit_ll, ops.softplus(zs)), T))
            if j >= 1:
                # segment may end at boundary j for threads started before j
                logp = ops.neg(ops.softplus(ops.neg(ops.slice_rows(zs, 0, j))))
                stops.append(ops.pad_rows(logp, T))
            else:
                stops.append(Tensor(np.zeros(T)))        # boundary 0: no stop
        # last boundary: every thread consumes s_T, stop head only
        h, c = self.segment.step(Tensor(np.tile(traj[T], (T, 1))), h, c)
        zs = ops.add(ops.matmul(h, self.w_stop), self.b_stop)
        stops.append(ops.neg(ops.softplus(ops.neg(zs))))

        cum = ops.cumsum_rows(ops.stack_rows(conts))     # (T, T)
        stop = ops.stack_rows(stops)                     # (T+1, T)
        return ops.add(ops.pad_rows(cum, T + 1, offset=1), stop)
