"""Multigrid hierarchy: uniform levels, Jacobi diagonals and the coarse factorization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..shared.errors import ConfigurationError, InvalidArgumentError
from .mesh import MeshLevel

logger = logging.getLogger(__name__)

DEFAULT_MAX_COARSE = 4096


@dataclass
class MGHierarchy:
    """levels[0] is the coarsest, levels[-1] the finest."""
    levels: list[MeshLevel]
    diagonals: list[np.ndarray]
    coarse_factor: tuple = field(repr=False)

    @property
    def finest(self) -> MeshLevel:
        return self.levels[-1]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def coarse_solve(self, f: np.ndarray) -> np.ndarray:
        """Direct solve on level 0 in the mean-free subspace."""
        coarse = self.levels[0]
        rhs = coarse.check(f).ravel()
        rhs = rhs - rhs.mean()
        return cho_solve(self.coarse_factor, rhs).reshape(coarse.shape)


def default_levels(e_fine: int, q: int, max_coarse: int = DEFAULT_MAX_COARSE) -> int:
    """Coarsen down to e = 2 (or e = 1 when even that is too large)."""
    levels = max(int(np.log2(e_fine)) - 1, 0)
    while levels < int(np.log2(e_fine)) and ((e_fine >> levels) * q) ** 3 > max_coarse:
        levels += 1
    return levels


def assemble_hierarchy(e_fine: int, q: int, levels: int, max_coarse: int = DEFAULT_MAX_COARSE) -> MGHierarchy:
    """Levels e_fine / 2^k for k = levels..0, diagonals, and the factorized coarse operator."""
    if levels < 0 or e_fine % (1 << levels):
        raise InvalidArgumentError(f"e_fine={e_fine} is not divisible by 2^{levels}")
    meshes = [MeshLevel(e_fine >> (levels - k), q) for k in range(levels + 1)]
    coarse = meshes[0]
    if coarse.size > max_coarse:
        raise ConfigurationError(
            f"coarse level has {coarse.size} unknowns (e={coarse.e}, q={q}); limit is {max_coarse}")

    diagonals = [mesh.diagonal() for mesh in meshes]
    a0 = coarse.dense_operator() + np.full((coarse.size, coarse.size), 1.0 / coarse.size)
    factor = cho_factor(a0)
    logger.info("hierarchy q=%d: e=%s, coarse N=%d", q, [m.e for m in meshes], coarse.size)
    return MGHierarchy(meshes, diagonals, factor)
