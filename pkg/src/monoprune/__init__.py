"""Enumerative synthesis with automatically derived interval pruning."""

__version__ = "0.1.0"
