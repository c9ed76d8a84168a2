"""Symmetric bistochastic matrices, H-unistochastic hulls and rank-one correlation hulls."""

from .birkhoff import KatzPartition, katz_extreme_point, katz_partitions
from .cp_maps import KrausMap, MixedHermitianUnitary, fourier_pipeline
from .cut_polytope import WalshCertificate, CutDistribution, cut_membership
from .hull import HermitianUnitary, estimate_lambda, sampled_hull_membership
from .lp import FeasibilityProblem, solve_feasibility

__all__ = [
    "WalshCertificate", "CutDistribution", "FeasibilityProblem", "HermitianUnitary",
    "KatzPartition", "KrausMap", "MixedHermitianUnitary", "cut_membership",
    "estimate_lambda", "katz_extreme_point", "katz_partitions", "fourier_pipeline",
    "sampled_hull_membership", "solve_feasibility",
]
