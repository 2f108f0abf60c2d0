"""Subgoal discovery and hierarchical policy learning for composite dialogues."""

__version__ = "0.1.0"
