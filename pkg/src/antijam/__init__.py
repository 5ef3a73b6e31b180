"""Anti-jamming link simulator and dual-head deep Q-learning agent."""

__version__ = "0.1.0"
