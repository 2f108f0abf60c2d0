"""Minimal float64 neural substrate: tape autodiff, LSTM, RMSProp, checkpoints."""

from . import ops
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckError, grad_check
from .lstm import LstmCell, lstm_step
from .optim import RmsProp, clip_global_norm
from .tensor import Parameter, Tape, Tensor, as_tensor

__all__ = [
    "ops", "Tensor", "Parameter", "Tape", "as_tensor",
    "LstmCell", "lstm_step", "RmsProp", "clip_global_norm",
    "grad_check", "GradCheckError",
    "save_checkpoint", "load_checkpoint", "CheckpointError",
]
