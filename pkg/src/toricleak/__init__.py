"""Leakage-aware stochastic simulator of toric-code quantum memory."""

__version__ = "0.1.0"
