"""Travel dialogue domain: schema, knowledge base, tracking, featurization."""

from .featurizer import WIDTH, StateFeaturizer, featurize
from .kb import KnowledgeBase, generate_kb, load_kb, save_kb
from .schema import (ACT_TYPES, ACTION_TABLE, AGENT, AGENT_INFORMABLE,
                     AGENT_REQUESTABLE, ALL_SLOTS, ANY_VALUE, DialogueAct,
                     FLIGHT, FLIGHT_SLOTS, HOTEL, HOTEL_SLOTS,
                     JOINT_CONSTRAINTS, NUM_ACTIONS, SUBTASKS, USER, inform,
                     request)
from .tracker import (AGENT_INFORMED, CONFIRMED, USER_INFORMED, UNKNOWN,
                      DialogueTracker, TrackerState, constraints_for)

__all__ = [
    "DialogueAct", "inform", "request", "ACT_TYPES", "ACTION_TABLE",
    "NUM_ACTIONS", "ALL_SLOTS", "FLIGHT_SLOTS", "HOTEL_SLOTS", "SUBTASKS",
    "FLIGHT", "HOTEL", "AGENT", "USER", "ANY_VALUE", "JOINT_CONSTRAINTS",
    "AGENT_REQUESTABLE", "AGENT_INFORMABLE",
    "KnowledgeBase", "generate_kb", "save_kb", "load_kb",
    "DialogueTracker", "TrackerState", "constraints_for",
    "UNKNOWN", "USER_INFORMED", "AGENT_INFORMED", "CONFIRMED",
    "StateFeaturizer", "featurize", "WIDTH",
]
