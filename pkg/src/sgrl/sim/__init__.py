"""User goals, agenda-based user simulation, and the dialogue environment."""

from .env import DialogueEnv, EpisodeOutcome, StepResult
from .goals import UserGoal, load_goals, sample_goal, save_goals, validate_goal
from .user import AgendaUser, dialogue_success, row_satisfies

__all__ = [
    "DialogueEnv", "StepResult", "EpisodeOutcome",
    "UserGoal", "sample_goal", "validate_goal", "save_goals", "load_goals",
    "AgendaUser", "dialogue_success", "row_satisfies",
]
