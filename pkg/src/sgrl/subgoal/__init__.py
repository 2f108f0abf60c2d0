from .estimator import SubgoalDiscoveryNetwork, TrainingError
from .likelihood import EvalCounter, exact_log_likelihood, viterbi_boundaries
from .model import SegmentModel
from .stream import TerminationStream

__all__ = ["SubgoalDiscoveryNetwork", "TrainingError", "EvalCounter",
           "exact_log_likelihood", "viterbi_boundaries", "SegmentModel",
           "TerminationStream"]
