"""Free-space Laplace Green's function."""

from dataclasses import dataclass

import numpy as np

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class LaplaceKernel:
    """K(x) = -1 / (4 pi |x|). Homogeneous of degree -1."""

    def __call__(self, r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            out = -1.0 / (FOUR_PI * np.asarray(r, dtype=float))
        return np.where(np.isfinite(out), out, 0.0)

    def matrix(self, targets: np.ndarray, sources: np.ndarray) -> np.ndarray:
        """Dense K(t_i - s_j); coincident pairs contribute zero."""
        diff = np.atleast_2d(targets)[:, None, :] - np.atleast_2d(sources)[None, :, :]
        return self(np.linalg.norm(diff, axis=-1))

    def potential(self, targets: np.ndarray, sources: np.ndarray, density: np.ndarray) -> np.ndarray:
        return self.matrix(targets, sources) @ density


LAPLACE = LaplaceKernel()
