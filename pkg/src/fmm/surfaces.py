"""Equivalent and check surfaces of the kernel-independent FMM."""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from ..shared.errors import InvalidArgumentError


class SurfaceRole(Enum):
    UP_EQUIV = "upward-equivalent"
    UP_CHECK = "upward-check"
    DOWN_CHECK = "downward-check"
    DOWN_EQUIV = "downward-equivalent"


def surface_count(m: int) -> int:
    return 6 * (m - 1) ** 2 + 2


@lru_cache(maxsize=None)
def surface_lattice(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Boundary points of the regular m^3 lattice on [-1, 1]^3 and their lattice indices."""
    if m < 2:
        raise InvalidArgumentError(f"surface order m must be >= 2, got {m}")
    idx = np.stack(np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij"), axis=-1).reshape(-1, 3)
    on_boundary = np.any((idx == 0) | (idx == m - 1), axis=1)
    idx = idx[on_boundary]
    points = np.linspace(-1.0, 1.0, m)[idx]
    points.setflags(write=False)
    idx.setflags(write=False)
    return points, idx


@dataclass(frozen=True)
class EquivalentSurface:
    """Surface points around a cube of side `side` centered at `center`."""
    m: int
    role: SurfaceRole
    ratio: float  # surface half-width over cube half-width

    @property
    def count(self) -> int:
        return surface_count(self.m)

    def points(self, center=(0.0, 0.0, 0.0), side: float = 1.0) -> np.ndarray:
        unit, _ = surface_lattice(self.m)
        return np.asarray(center, dtype=float) + 0.5 * self.ratio * side * unit

    @property
    def spacing(self) -> float:
        """Lattice spacing for a unit cube."""
        return self.ratio / (self.m - 1)
