"""Simulation and verification toolkit for l1-constrained ERM on beta-mixing, heavy-tailed data."""
from heavyerm.dgp import DgpKind, DgpSpec, NoiseKind, NoiseSpec, Sample, generate
from heavyerm.erm import FitResult, LossKind, LossSpec, SolverOptions, erm_fit
from heavyerm.risk import StationaryCov, l2_error, stationary_cov

__all__ = [
    "DgpKind", "DgpSpec", "NoiseKind", "NoiseSpec", "Sample", "generate",
    "FitResult", "LossKind", "LossSpec", "SolverOptions", "erm_fit",
    "StationaryCov", "l2_error", "stationary_cov",
]
