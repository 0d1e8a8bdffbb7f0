"""Replication-aware multi-armed bandit simulation and verification."""

__version__ = "1.0.0"
