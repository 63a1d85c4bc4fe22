"""Desk-scale wireless network emulator: sparse-FIR channel engine, scenarios,
traffic generation, virtual radio nodes and batch orchestration."""

from ._numba import backend

__version__ = "0.1.0"
__all__ = ["backend", "__version__"]
