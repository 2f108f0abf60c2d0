"""Trainable wrapper around the segmentation model.

Fits by maximum likelihood over a corpus of successful-episode state
trajectories, with RMSProp, gradient clipping, periodic validation, and
halving of the learning rate when validation stalls. The best-scoring
parameters seen are restored at the end of fit.

Early in training the likelihood's posterior over segmentations tends to
lock onto whichever one leads first, usually the single uncut segment,
starving every other boundary's latent seed of gradient. fit() therefore
supports deterministic annealing: segment scores are divided by a
temperature that starts at anneal_temp and decays linearly to 1, keeping
the posterior spread across segmentations while the seeds are still
learning. Validation is always scored at temperature 1.
"""

from functools import reduce

import numpy as np
from sklearn.base import BaseEstimator

from ..kernel import ops
from ..kernel.checkpoint import load_checkpoint, save_checkpoint
from ..kernel.optim import RmsProp, clip_global_norm
from ..kernel.tensor import Tape
from .likelihood import exact_log_likelihood, viterbi_boundaries
from .model import SegmentModel


class TrainingError(RuntimeError):
    pass


class SubgoalDiscoveryNetwork(BaseEstimator):
    """Unsupervised subgoal discovery by trajectory segmentation.

    fit() takes a list of (T+1, state_dim) arrays. predict() returns the
    most likely boundary list per trajectory, segment() adds the subgoal
    symbol chosen at each segment start.
    """

    def __init__(self, latent_slots=4, hidden_size=50, max_segments=4,
                 learning_rate=1e-3, batch_size=8, max_steps=50000,
                 eval_every=200, plateau_patience=10, min_learning_rate=1e-5,
                 improve_tol=1e-3, max_grad_norm=5.0, anneal_temp=1.0,
                 anneal_frac=0.5, seed=0, verbose=False):
        self.latent_slots = latent_slots
        self.hidden_size = hidden_size
        self.max_segments = max_segments
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_steps = max_steps
        self.eval_every = eval_every
        self.plateau_patience = plateau_patience
        self.min_learning_rate = min_learning_rate
        self.improve_tol = improve_tol
        self.max_grad_norm = max_grad_norm
        self.anneal_temp = anneal_temp
        self.anneal_frac = anneal_frac
        self.seed = seed
        self.verbose = verbose

    # -- training ---------------------------------------------------------

    def _tau_at(self, step):
        if self.anneal_temp <= 1.0:
            return 1.0
        horizon = max(1, int(self.anneal_frac * self.max_steps))
        if step >= horizon:
            return 1.0
        return self.anneal_temp + (1.0 - self.anneal_temp) * step / horizon

    def _batch_loss(self, trajs, counter=None, tau=1.0):
        lls = []
        for t in trajs:
            seg = self.model_.segment_matrix(t)
            if tau != 1.0:
                seg = ops.scale(seg, 1.0 / tau)
            lls.append(exact_log_likelihood(seg, self.max_segments,
                                            counter=counter))
        total = reduce(ops.add, lls)
        return ops.scale(total, -1.0 / len(trajs))

    def _mean_ll(self, trajs):
        vals = [float(exact_log_likelihood(self.model_.segment_matrix(t),
                                           self.max_segments).data)
                for t in trajs]
        return float(np.mean(vals))

    def fit(self, X, y=None, validation=None):
        X = [np.asarray(t, dtype=np.float64) for t in X]
        if not X:
            raise ValueError("empty corpus")
        self.n_features_in_ = X[0].shape[1]
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 1]))
        if validation is None:
            idx = np.random.default_rng(
                np.random.SeedSequence([self.seed, 2])).permutation(len(X))
            n_val = max(1, len(X) // 10) if len(X) > 1 else 0
            validation = [X[i] for i in idx[:n_val]]
            train = [X[i] for i in idx[n_val:]]
        else:
            validation = [np.asarray(t, dtype=np.float64) for t in validation]
            train = X
        if not train:
            raise ValueError("corpus too small to split")
        if not validation:
            validation = train

        self.model_ = SegmentModel(self.n_features_in_, self.latent_slots,
                                   self.hidden_size, seed=self.seed)
        params = self.model_.param_list()
        opt = RmsProp(params, lr=self.learning_rate,
                      clip_norm=self.max_grad_norm)
        best_ll = -np.inf
        best_state = self.model_.state_arrays()
        stalled = 0
        self.history_ = []
        step = 0
        while step < self.max_steps:
            batch = [train[int(i)] for i in
                     rng.integers(0, len(train), size=self.batch_size)]
            tau = self._tau_at(step)
            with Tape() as tape:
                loss = self._batch_loss(batch, tau=tau)
                grads = tape.backward(loss, params)
            if not np.isfinite(float(loss.data)):
                raise TrainingError("loss diverged at step %d" % step)
            opt.step(grads)
            step += 1
            if step % self.eval_every == 0 or step == self.max_steps:
                val_ll = self._mean_ll(validation)
                if not np.isfinite(val_ll):
                    raise TrainingError("validation diverged at step %d" % step)
                self.history_.append({"step": step, "train_loss": float(loss.data),
                                      "val_ll": val_ll, "lr": opt.lr,
                                      "tau": tau})
                if self.verbose:
                    print("step %6d  train %.3f  val_ll %.3f  lr %.2e  tau %.2f"
                          % (step, float(loss.data), val_ll, opt.lr, tau),
                          flush=True)
                if val_ll > best_ll + self.improve_tol:
                    best_ll = val_ll
                    best_state = self.model_.state_arrays()
                    stalled = 0
                elif tau == 1.0:
                    # plateau handling waits until annealing has finished
                    stalled += 1
                    if stalled >= self.plateau_patience:
                        opt.lr *= 0.5
                        stalled = 0
                        if opt.lr < self.min_learning_rate:
                            break
        self.model_.load_state(best_state)
        self.best_val_ll_ = best_ll
        return self

    # -- inference --------------------------------------------------------

    def score(self, X, y=None):
        """Mean per-trajectory log likelihood."""
        self._check_fitted()
        return self._mean_ll([np.asarray(t, dtype=np.float64) for t in X])

    def predict(self, X):
        """Most likely boundary list for each trajectory."""
        self._check_fitted()
        return [self.segment(t)[0] for t in X]

    def segment(self, traj):
        """(boundaries, symbol ids), one symbol per segment start."""
        self._check_fitted()
        traj = np.asarray(traj, dtype=np.float64)
        seg = self.model_.segment_matrix(traj)
        bounds = viterbi_boundaries(seg.data, self.max_segments)
        logits = self.model_.latent_logits(traj).data
        labels = [int(np.argmax(logits[b])) for b in bounds[:-1]]
        return bounds, labels

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("call fit() or load() first")

    # -- persistence ------------------------------------------------------

    def save(self, path, extra_meta=None):
        self._check_fitted()
        meta = {k: v for k, v in self.get_params().items()}
        meta["state_dim"] = self.n_features_in_
        if extra_meta:
            meta.update(extra_meta)
        save_checkpoint(path, "SDN", self.model_.state_arrays(), meta)

    @classmethod
    def load(cls, path):
        kind, arrays, meta = load_checkpoint(path)
        if kind != "SDN":
            raise ValueError("not a subgoal model checkpoint: %s" % kind)
        state_dim = int(meta.pop("state_dim"))
        allowed = set(cls().get_params())
        est = cls(**{k: v for k, v in meta.items() if k in allowed})
        est.n_features_in_ = state_dim
        est.model_ = SegmentModel(state_dim, est.latent_slots,
                                  est.hidden_size, seed=est.seed)
        est.model_.load_state(arrays)
        return est
