"""Singular and near-singular volume quadrature of K against Chebyshev modes.

The primitive is `box_integrals`: for one target point and one axis-aligned box
inside a source octant it returns the full (q, q, q) tensor

    I[i, j, k] = int_box K(x - y) T_i(xi_1) T_j(xi_2) T_k(xi_3) dy

with xi the source octant's local coordinate. A box containing the target is cut
at the target into corner boxes; each corner box is trimmed to aspect ratio two
and split into three Duffy pyramids whose apex is the target. Everything else
goes through tensor Gauss rules, bisecting until the box is well separated.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import legendre as npleg

from ..shared.errors import SetupError
from .kernel import LAPLACE

logger = logging.getLogger(__name__)

SEPARATION = 1.0  # dist / diameter above which a plain tensor rule is used
MAX_SPLITS = 60
_TOUCH = 1e-14


@lru_cache(maxsize=None)
def gauss_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = npleg.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


class BoxIntegrator:
    """Integrates K(x - y) T_ijk(xi(y)) over boxes of one source octant for one target x."""

    def __init__(self, target: np.ndarray, octant_lower: np.ndarray, octant_side: float, q: int,
                 kernel: Callable[[np.ndarray], np.ndarray] = LAPLACE, label: str = ""):
        self.target = np.asarray(target, dtype=float)
        self.octant_lower = np.asarray(octant_lower, dtype=float)
        self.octant_side = float(octant_side)
        self.q = q
        self.kernel = kernel
        self.label = label
        self.n_regular = q + 8
        self.n_radial = 3 * q // 2 + 1
        self.n_angular = q + 12

    def _vander(self, coords: np.ndarray, axis: int) -> np.ndarray:
        xi = 2.0 * (coords - self.octant_lower[axis]) / self.octant_side - 1.0
        return npcheb.chebvander(np.clip(xi, -1.0, 1.0), self.q - 1)

    def box(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        scale = float(np.max(hi - lo))
        t = self.target
        if np.all(t >= lo - _TOUCH * scale) and np.all(t <= hi + _TOUCH * scale):
            return self._split_at_target(lo, hi, np.clip(t, lo, hi))
        return self._regular(lo, hi, 0)

    def _split_at_target(self, lo, hi, apex) -> np.ndarray:
        out = np.zeros((self.q,) * 3)
        scale = float(np.max(hi - lo))
        for corner in range(8):
            signs = np.array([1.0 if (corner >> e) & 1 else -1.0 for e in range(3)])
            extents = np.where(signs > 0, hi - apex, apex - lo)
            if np.any(extents <= _TOUCH * scale):
                continue
            out += self._corner(apex, signs, extents)
        return out

    def _corner(self, apex, signs, extents) -> np.ndarray:
        core = np.minimum(extents, 2.0 * extents.min())
        out = sum(self._pyramid(apex, signs, core, d) for d in range(3))
        for e in range(3):
            if extents[e] <= core[e]:
                continue
            a_lo = np.zeros(3)
            a_hi = extents.copy()
            a_lo[e] = core[e]
            a_hi[:e] = core[:e]
            p, r = apex + signs * a_lo, apex + signs * a_hi
            out = out + self._regular(np.minimum(p, r), np.maximum(p, r), 0)
        return out

    def _pyramid(self, apex, signs, core, d: int) -> np.ndarray:
        """Duffy map of the pyramid with apex at the target and base on the far face normal to d."""
        a, b = [e for e in range(3) if e != d]
        u, wu = gauss_unit(self.n_radial)
        v, wv = gauss_unit(self.n_angular)
        cd, ca, cb = core[d], core[a], core[b]

        rho = np.sqrt(cd ** 2 + (v[:, None] * ca) ** 2 + (v[None, :] * cb) ** 2)
        r = u[:, None, None] * rho[None, :, :]
        weights = (u ** 2 * wu)[:, None, None] * wv[None, :, None] * wv[None, None, :]
        g = self.kernel(r) * weights * (cd * ca * cb)

        td = self._vander(apex[d] + signs[d] * u * cd, d)
        ta = self._vander(apex[a] + signs[a] * np.outer(u, v) * ca, a)
        tb = self._vander(apex[b] + signs[b] * np.outer(u, v) * cb, b)

        h = np.einsum("abc,ack->abk", g, tb)
        h = np.einsum("abk,abj->ajk", h, ta)
        res = np.einsum("ajk,ai->ijk", h, td)
        return np.transpose(res, np.argsort((d, a, b)))

    def _regular(self, lo, hi, depth: int) -> np.ndarray:
        ext = hi - lo
        if np.any(ext <= 0.0):
            return np.zeros((self.q,) * 3)
        t = self.target
        gap = np.maximum(np.maximum(lo - t, t - hi), 0.0)
        dist = float(np.linalg.norm(gap))
        diam = float(np.linalg.norm(ext))
        if dist <= _TOUCH * diam:
            return self._split_at_target(lo, hi, np.clip(t, lo, hi))
        if dist >= SEPARATION * diam:
            return self._tensor(lo, hi)
        if depth >= MAX_SPLITS:
            logger.error("quadrature subdivision limit hit for %s", self.label or "box")
            raise SetupError(f"near quadrature did not converge for offset class {self.label or '?'}")
        axis = int(np.argmax(ext))
        mid = 0.5 * (lo[axis] + hi[axis])
        hi1, lo2 = hi.copy(), lo.copy()
        hi1[axis] = mid
        lo2[axis] = mid
        return self._regular(lo, hi1, depth + 1) + self._regular(lo2, hi, depth + 1)

    def _tensor(self, lo, hi) -> np.ndarray:
        x, w = gauss_unit(self.n_regular)
        pts = [lo[e] + (hi[e] - lo[e]) * x for e in range(3)]
        wts = [(hi[e] - lo[e]) * w for e in range(3)]
        t = self.target
        r2 = ((t[0] - pts[0])[:, None, None] ** 2
              + (t[1] - pts[1])[None, :, None] ** 2
              + (t[2] - pts[2])[None, None, :] ** 2)
        g = self.kernel(np.sqrt(r2)) * wts[0][:, None, None] * wts[1][None, :, None] * wts[2][None, None, :]
        v0, v1, v2 = (self._vander(pts[e], e) for e in range(3))
        return np.einsum("abc,ai,bj,ck->ijk", g, v0, v1, v2, optimize=True)


def box_integrals(target: np.ndarray, lo: np.ndarray, hi: np.ndarray, octant_lower: np.ndarray,
                  octant_side: float, q: int, label: str = "") -> np.ndarray:
    """(q, q, q) integrals of K(target - y) times each tensor Chebyshev mode over [lo, hi]."""
    return BoxIntegrator(target, octant_lower, octant_side, q, label=label).box(lo, hi)


def octant_integrals(targets: np.ndarray, center: np.ndarray, side: float, q: int,
                     label: str = "") -> np.ndarray:
    """(n_targets, q, q, q) integrals over a whole source cube given by center and side."""
    center = np.asarray(center, dtype=float)
    lower = center - 0.5 * side
    upper = center + 0.5 * side
    out = np.empty((len(targets), q, q, q))
    for n, t in enumerate(np.atleast_2d(targets)):
        out[n] = box_integrals(t, lower, upper, lower, side, q, label=label)
    return out
