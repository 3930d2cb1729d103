"""Spectral Poisson solver on uniform periodic grids."""

from .grid import GridField, dump_grid, grid_csv, grid_points, load_grid
from .solver import (
    SpectralPoissonSolver,
    SpectralSolution,
    dft3_forward,
    dft3_inverse,
    poisson_spectral_solve,
    signed_frequencies,
    spectral_laplacian,
    trig_interpolate,
)

__all__ = [
    "GridField",
    "SpectralPoissonSolver",
    "SpectralSolution",
    "dft3_forward",
    "dft3_inverse",
    "dump_grid",
    "grid_csv",
    "grid_points",
    "load_grid",
    "poisson_spectral_solve",
    "signed_frequencies",
    "spectral_laplacian",
    "trig_interpolate",
]
