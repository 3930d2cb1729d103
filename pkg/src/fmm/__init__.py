"""Kernel-independent volume FMM for piecewise Chebyshev sources."""

from .evaluator import FmmEvaluator, FmmNodeData, FmmParams, FmmResult, fmm_evaluate
from .kernel import LAPLACE, LaplaceKernel
from .near import NearTable, precompute_near_tables
from .surfaces import EquivalentSurface, SurfaceRole
from .translations import KifmmOperators, SurfaceConfig

__all__ = [
    "EquivalentSurface",
    "FmmEvaluator",
    "FmmNodeData",
    "FmmParams",
    "FmmResult",
    "KifmmOperators",
    "LAPLACE",
    "LaplaceKernel",
    "NearTable",
    "SurfaceConfig",
    "SurfaceRole",
    "fmm_evaluate",
    "precompute_near_tables",
]
