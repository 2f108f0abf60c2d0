from .runtime import AgentFactory, HumanSession, load_pool

__all__ = ["AgentFactory", "HumanSession", "load_pool"]
