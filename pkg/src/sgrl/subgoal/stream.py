"""Online segment-termination probabilities for a running episode.

Mirrors the scoring model one line at a time: the history encoder consumes
every state pushed, the segment decoder consumes the current segment, and
push() returns the decoder's stop probability after the new state. When the
driver declares a boundary it calls reset_segment(), which reseeds the
decoder with the subgoal mixture embedding from the latest history state,
exactly as the offline scorer does at that boundary.
"""

import numpy as np

from ..kernel.lstm import lstm_step
from ..kernel.tensor import Tensor


class TerminationStream:
    def __init__(self, model, threshold=0.2):
        self.model = model
        self.threshold = threshold

    def start(self, s0):
        """Begin an episode at state s0; the first segment opens here."""
        m = self.model
        z = Tensor(np.zeros(m.hidden_size))
        self._h2, self._c2 = lstm_step(m.history, Tensor(np.asarray(s0, dtype=np.float64)), z, z)
        self._refresh_latent()
        self._seed_segment()
        self.position = 0

    def _refresh_latent(self):
        m = self.model
        logits = self._h2.data @ m.w_latent.data + m.b_latent.data
        e = np.exp(logits - logits.max())
        self._latent = e / e.sum()

    def push(self, s):
        """Consume one new state; return the stop probability after it."""
        m = self.model
        x = Tensor(np.asarray(s, dtype=np.float64))
        self._h1, self._c1 = lstm_step(m.segment, x, self._h1, self._c1)
        zs = float(self._h1.data @ m.w_stop.data + m.b_stop.data[0])
        self._h2, self._c2 = lstm_step(m.history, x, self._h2, self._c2)
        self._refresh_latent()
        self.position += 1
        return 1.0 / (1.0 + np.exp(-zs))

    def reset_segment(self):
        """Declare a boundary at the current position; open a new segment."""
        self._seed_segment()

    def latent_label(self):
        """Subgoal symbol the open segment was seeded with."""
        return int(np.argmax(self._seed_latent))

    def _seed_segment(self):
        m = self.model
        self._seed_latent = self._latent.copy()
        init = self._latent @ m.embed.data
        z = Tensor(np.zeros(m.hidden_size))
        self._h1, self._c1 = lstm_step(m.segment, Tensor(init), z, z)
