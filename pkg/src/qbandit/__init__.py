"""Simulation library for quantum multi-armed bandits.

Bloch-vector qubit environments, regret-minimizing policies (UCB, LinUCB,
phased elimination, explore-then-commit, and the eigenvalue-controlled
weighted/median-of-means LinUCB variants), work-extraction batteries, a
quantum-data recommender, and a seeded experiment harness with a CLI.
"""

__version__ = "0.1.0"

from ._kernels import HAS_NUMBA
