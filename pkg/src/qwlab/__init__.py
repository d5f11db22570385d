"""qwlab: a numerical laboratory for 1D coin-step quantum walk scaling limits.

Simulates translation-invariant discrete-time walks exactly, computes their
finite-time and asymptotic position distributions, measures Levy/Kolmogorov
distances between them, and runs the rate experiments that exhibit the
n^{-1/3} ballistic convergence together with its Airy wavefront structure.
"""

from .walk import (
    KERNEL_BACKEND,
    CoinParams,
    InitialState,
    PositionDistribution,
    StepCDF,
    WalkState,
    distribution,
    distribution_snapshots,
    evolve,
    hadamard_coin,
    rescaled_cdf,
)

__all__ = [
    "KERNEL_BACKEND",
    "CoinParams",
    "InitialState",
    "PositionDistribution",
    "StepCDF",
    "WalkState",
    "distribution",
    "distribution_snapshots",
    "evolve",
    "hadamard_coin",
    "rescaled_cdf",
]

__version__ = "0.1.0"
