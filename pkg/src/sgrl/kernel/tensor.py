"""Reverse-mode automatic differentiation over numpy arrays.

A Tensor wraps a float64 ndarray. Ops on Tensors compute values eagerly and,
when a Tape is active, record a node with a vector-Jacobian closure. Backward
replays the recorded nodes once, in reverse creation order (creation order is
a topological order, so no explicit sort is needed).

Tapes are per-thread and never shared across concurrent forward passes. With
no active tape, ops run value-only, which is what rollout / serving code uses.
"""

import threading

import numpy as np

_local = threading.local()


def _tape_stack():
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


class Tensor:
    """Array node in the autodiff graph.

    watched=True means gradients flow to (or through) this tensor. Leaf
    parameters are created with Parameter(); constants stay unwatched and
    are skipped during accumulation.
    """

    __slots__ = ("data", "watched", "name")

    def __init__(self, data, watched=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.watched = watched
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return "Tensor(shape=%s, watched=%s%s)" % (
            self.data.shape, self.watched,
            ", name=%r" % self.name if self.name else "")


def Parameter(data, name=None):
    """Trainable leaf tensor."""
    return Tensor(np.array(data, dtype=np.float64, copy=True), watched=True, name=name)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Recorded op graph for one forward pass.

    Usage:
        with Tape() as tape:
            loss = ...ops...
        grads = tape.backward(loss, params)
    """

    def __init__(self):
        # each node: (out, inputs tuple, vjp fn: grad_out -> tuple of grads)
        self._nodes = []
        self._grads = None

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc):
        popped = _tape_stack().pop()
        assert popped is self

    def _record(self, out, inputs, vjp):
        self._nodes.append((out, inputs, vjp))

    def backward(self, loss, params):
        """Accumulate d(loss)/d(param) for every tensor in `params`.

        Touches every recorded node exactly once. Parameters the loss does
        not reach get zero gradients. Returns a list aligned with `params`.
        """
        assert loss.data.size == 1, "loss must be scalar"
        grads = {id(loss): np.ones_like(loss.data)}
        for out, inputs, vjp in reversed(self._nodes):
            g_out = grads.pop(id(out), None)
            if g_out is None:
                continue
            for inp, g in zip(inputs, vjp(g_out)):
                if g is None or not inp.watched:
                    continue
                acc = grads.get(id(inp))
                if acc is None:
                    grads[id(inp)] = np.array(g, dtype=np.float64, copy=True)
                else:
                    acc += g
        self._grads = grads
        return [grads.get(id(p), np.zeros_like(p.data)) for p in params]


def active_tape():
    stack = _tape_stack()
    return stack[-1] if stack else None


def _emit(out_data, inputs, vjp, watched):
    out = Tensor(out_data, watched=watched)
    tape = active_tape()
    if tape is not None and watched:
        tape._record(out, inputs, vjp)
    return out
