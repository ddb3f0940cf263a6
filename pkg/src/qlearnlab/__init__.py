"""Finite-class learning theory laboratory: exact dimensions with certificates,
quantum example simulation, and batch / online learning harnesses."""

__version__ = "0.1.0"
