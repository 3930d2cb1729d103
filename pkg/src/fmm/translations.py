"""Unit-scale KIFMM translation operators and their scaling rules.

All operators are built for a cube of side 1 centered at the origin (children
and neighbors placed relative to it). For a cube of side s the Laplace kernel's
homogeneity gives:

    upward density    = s   * P_up   @ upward check potential
    downward density  = s   * P_down @ downward check potential
    S2M check         = s^2 * S2UC   @ coeffs
    M2M / L2L / M2L / W / L2T carry 1 / s of the parent or the target
    X check           = s^2 * X      @ coeffs
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from ..chebyshev.approx import cheb_nodes, n_coeffs, truncation_mask
from ..shared.errors import ConfigurationError, SetupError
from .kernel import LAPLACE
from .quadrature import octant_integrals
from .surfaces import EquivalentSurface, SurfaceRole, surface_lattice

logger = logging.getLogger(__name__)

Offset = tuple[int, int, int]


def pseudo_inverse(mat: np.ndarray, cutoff: float) -> np.ndarray:
    """Truncated-SVD pseudoinverse with a cutoff relative to the largest singular value."""
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or not np.isfinite(s).all() or s[0] == 0.0:
        raise SetupError("equivalent-density fit is singular")
    keep = s > cutoff * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T


@dataclass(frozen=True)
class SurfaceConfig:
    m: int
    up_equiv: float = 1.05
    up_check: float = 2.95
    down_check: float = 1.05
    down_equiv: float = 2.95
    pinv_cutoff: float = 1e-12


class KifmmOperators:
    """Precomputed unit operators for one (q, m) pair plus memoized offset-dependent blocks."""

    def __init__(self, q: int, config: SurfaceConfig, fft_m2l: bool = False):
        self.q = q
        self.m = config.m
        self.config = config
        self.kernel = LAPLACE
        self.ue = EquivalentSurface(config.m, SurfaceRole.UP_EQUIV, config.up_equiv)
        self.uc = EquivalentSurface(config.m, SurfaceRole.UP_CHECK, config.up_check)
        self.dc = EquivalentSurface(config.m, SurfaceRole.DOWN_CHECK, config.down_check)
        self.de = EquivalentSurface(config.m, SurfaceRole.DOWN_EQUIV, config.down_equiv)
        if fft_m2l and config.up_equiv != config.down_check:
            raise ConfigurationError(
                "FFT M2L needs matching upward-equivalent and downward-check surfaces "
                f"({config.up_equiv} != {config.down_check})")
        self.fft_m2l = fft_m2l
        self._m2l: dict[Offset, np.ndarray] = {}
        self._m2l_hat: dict[Offset, np.ndarray] = {}
        self._w: dict[Offset, np.ndarray] = {}
        self._x: dict[Offset, np.ndarray] = {}

    @property
    def n_surf(self) -> int:
        return self.ue.count

    @property
    def n_nodes(self) -> int:
        return self.q ** 3

    @property
    def n_coeffs(self) -> int:
        return n_coeffs(self.q)

    @cached_property
    def leaf_nodes(self) -> np.ndarray:
        """Chebyshev nodes of the unit cube centered at the origin."""
        x = 0.5 * cheb_nodes(self.q)
        return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)

    # --- fits ---

    @cached_property
    def up_pinv(self) -> np.ndarray:
        return pseudo_inverse(self.kernel.matrix(self.uc.points(), self.ue.points()), self.config.pinv_cutoff)

    @cached_property
    def down_pinv(self) -> np.ndarray:
        return pseudo_inverse(self.kernel.matrix(self.dc.points(), self.de.points()), self.config.pinv_cutoff)

    # --- leaf operators ---

    @cached_property
    def s2uc(self) -> np.ndarray:
        """(n_surf, n_coeffs): leaf source coefficients to upward-check potential."""
        full = octant_integrals(self.uc.points(), np.zeros(3), 1.0, self.q, label="s2m")
        return full.reshape(self.n_surf, -1)[:, truncation_mask(self.q)]

    @cached_property
    def l2t(self) -> np.ndarray:
        """(q^3, n_surf): downward density to potential at leaf nodes."""
        return self.kernel.matrix(self.leaf_nodes, self.de.points())

    # --- tree operators ---

    @staticmethod
    def child_center(child_index: int) -> np.ndarray:
        return np.array([0.25 if (child_index >> e) & 1 else -0.25 for e in range(3)])

    @cached_property
    def m2m(self) -> list[np.ndarray]:
        """Per child index: child upward density to parent upward-check potential."""
        return [self.kernel.matrix(self.uc.points(), self.ue.points(self.child_center(c), 0.5)) for c in range(8)]

    @cached_property
    def l2l(self) -> list[np.ndarray]:
        """Per child index: parent downward density to child downward-check potential."""
        return [self.kernel.matrix(self.dc.points(self.child_center(c), 0.5), self.de.points()) for c in range(8)]

    def m2l(self, offset: Offset) -> np.ndarray:
        """Source upward density to target downward check; source center at `offset` target sides."""
        mat = self._m2l.get(offset)
        if mat is None:
            mat = self.kernel.matrix(self.dc.points(), self.ue.points(offset, 1.0))
            self._m2l[offset] = mat
        return mat

    def w(self, offset: Offset) -> np.ndarray:
        """Finer source upward density to target nodes; offset in quarter target sides."""
        mat = self._w.get(offset)
        if mat is None:
            center = np.asarray(offset, dtype=float) / 4.0
            mat = self.kernel.matrix(self.leaf_nodes, self.ue.points(center, 0.5))
            self._w[offset] = mat
        return mat

    def x(self, offset: Offset) -> np.ndarray:
        """Coarser source coefficients to target downward check; offset in quarter target sides."""
        mat = self._x.get(offset)
        if mat is None:
            center = np.asarray(offset, dtype=float) / 4.0
            full = octant_integrals(self.dc.points(), center, 2.0, self.q, label=f"x{offset}")
            mat = full.reshape(self.n_surf, -1)[:, truncation_mask(self.q)]
            self._x[offset] = mat
        return mat

    # --- FFT M2L ---

    @property
    def fft_shape(self) -> tuple[int, int, int]:
        return (2 * self.m,) * 3

    def embed(self, densities: np.ndarray) -> np.ndarray:
        """Scatter (batch, n_surf) surface values onto the (2m)^3 zero-padded lattice."""
        _, idx = surface_lattice(self.m)
        grid = np.zeros((densities.shape[0],) + self.fft_shape)
        grid[:, idx[:, 0], idx[:, 1], idx[:, 2]] = densities
        return grid

    def extract(self, grid: np.ndarray) -> np.ndarray:
        _, idx = surface_lattice(self.m)
        return grid[:, idx[:, 0], idx[:, 1], idx[:, 2]]

    def m2l_hat(self, offset: Offset) -> np.ndarray:
        """Fourier transform of the lattice Toeplitz kernel for one V offset."""
        hat = self._m2l_hat.get(offset)
        if hat is None:
            m = self.m
            h = self.ue.spacing
            d = np.arange(-(m - 1), m)
            dd = np.stack(np.meshgrid(d, d, d, indexing="ij"), axis=-1)
            r = np.linalg.norm(h * dd - np.asarray(offset, dtype=float), axis=-1)
            kernel = np.zeros(self.fft_shape)
            wrapped = d % (2 * m)
            kernel[np.ix_(wrapped, wrapped, wrapped)] = self.kernel(r)
            hat = scipy.fft.rfftn(kernel)
            self._m2l_hat[offset] = hat
        return hat
