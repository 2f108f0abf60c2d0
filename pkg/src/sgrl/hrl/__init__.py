from .episodes import (EpisodeStats, run_discovered_episode,
                       run_flat_episode, run_subtask_episode)
from .nets import QMlp, goal_input
from .replay import OptionTuple, ReplayBuffer, StepTuple
from .targets import option_target, step_target
from .training import (DiscoveredTrainer, FlatTrainer, SubtaskTrainer,
                       TrainSettings, epsilon_at, evaluate_greedy,
                       margin_weight_at, train_agent)

__all__ = [
    "EpisodeStats", "run_flat_episode", "run_subtask_episode",
    "run_discovered_episode", "QMlp", "goal_input", "OptionTuple",
    "StepTuple", "ReplayBuffer", "option_target", "step_target",
    "FlatTrainer", "SubtaskTrainer", "DiscoveredTrainer", "TrainSettings",
    "epsilon_at", "evaluate_greedy", "margin_weight_at", "train_agent",
]
