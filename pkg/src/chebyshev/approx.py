"""Truncated tensor Chebyshev approximation on octants.

Coefficients follow the standard orthogonality normalization (halved zero-index
modes) so that f(xi) = sum alpha_ijk T_i(xi_1) T_j(xi_2) T_k(xi_3), with xi the
octant-local coordinate in [-1, 1]^3. Only the total-degree set i + j + k < q
is stored.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from ..octree.morton import MortonKey
from ..shared.errors import ApproximationError, InvalidArgumentError

ScalarField = Callable[[np.ndarray], np.ndarray]  # (N, 3) points -> (N,) values

_EVAL_SLACK = 1e-10


@lru_cache(maxsize=None)
def cheb_nodes(q: int) -> np.ndarray:
    """Chebyshev-Gauss (root) nodes on [-1, 1], symmetric: x[q-1-n] = -x[n]."""
    n = np.arange(q)
    nodes = np.cos(np.pi * (n + 0.5) / q)
    nodes.setflags(write=False)
    return nodes


@lru_cache(maxsize=None)
def _forward_matrix(q: int) -> np.ndarray:
    theta = np.pi * (np.arange(q) + 0.5) / q
    mat = (2.0 / q) * np.cos(np.outer(np.arange(q), theta))
    mat[0] *= 0.5
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def truncated_indices(q: int) -> np.ndarray:
    """(i, j, k) with i + j + k < q, lexicographic."""
    idx = np.array([(i, j, k) for i in range(q) for j in range(q) for k in range(q) if i + j + k < q],
                   dtype=int).reshape(-1, 3)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=None)
def truncation_mask(q: int) -> np.ndarray:
    """Flat boolean mask over the full q^3 tensor selecting the stored set."""
    i, j, k = np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij")
    mask = ((i + j + k) < q).ravel()
    mask.setflags(write=False)
    return mask


def n_coeffs(q: int) -> int:
    return q * (q + 1) * (q + 2) // 6


@lru_cache(maxsize=None)
def basis_integrals(q: int) -> np.ndarray:
    """Integral of T_i over [-1, 1] for i < q."""
    i = np.arange(q)
    out = np.zeros(q)
    even = i % 2 == 0
    out[even] = 2.0 / (1.0 - i[even] ** 2)
    return out


@dataclass(frozen=True)
class ChebCoeffs:
    """Truncated coefficients of one octant."""
    q: int
    coeffs: np.ndarray  # ordered as truncated_indices(q)
    octant: MortonKey

    def __post_init__(self):
        if self.coeffs.shape != (n_coeffs(self.q),):
            raise InvalidArgumentError(
                f"expected {n_coeffs(self.q)} coefficients for q={self.q}, got {self.coeffs.shape}")

    def full(self) -> np.ndarray:
        """Dense (q, q, q) tensor with zeros outside the stored set."""
        out = np.zeros(self.q ** 3)
        out[truncation_mask(self.q)] = self.coeffs
        return out.reshape(self.q, self.q, self.q)

    def mean(self) -> float:
        """Mean of the represented polynomial over its octant."""
        w = basis_integrals(self.q)
        return float(np.einsum("ijk,i,j,k->", self.full(), w, w, w) / 8.0)

    def shifted(self, constant: float) -> "ChebCoeffs":
        coeffs = self.coeffs.copy()
        coeffs[0] += constant
        return ChebCoeffs(self.q, coeffs, self.octant)


def octant_nodes(octant: MortonKey, q: int) -> np.ndarray:
    """Physical tensor nodes of an octant, (q^3, 3), first axis slowest."""
    x = cheb_nodes(q)
    local = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    return octant.lower + 0.5 * (local + 1.0) * octant.side


def values_to_full(values: np.ndarray, q: int) -> np.ndarray:
    """Full tensor coefficients from samples at the tensor nodes."""
    v = np.asarray(values, dtype=float).reshape(q, q, q)
    c = _forward_matrix(q)
    return np.einsum("ia,jb,kc,abc->ijk", c, c, c, v, optimize=True)


def cheb_from_values(values: np.ndarray, octant: MortonKey, q: int) -> ChebCoeffs:
    full = values_to_full(values, q)
    return ChebCoeffs(q, full.ravel()[truncation_mask(q)], octant)


def cheb_approx(f: ScalarField, octant: MortonKey, q: int) -> ChebCoeffs:
    """Interpolate f at the octant's q^3 tensor nodes, then truncate to i+j+k<q."""
    if q < 1:
        raise InvalidArgumentError(f"order q must be >= 1, got {q}")
    values = np.asarray(f(octant_nodes(octant, q)), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ApproximationError(f"non-finite samples of f on octant {octant}")
    return cheb_from_values(values, octant, q)


def local_coordinates(octant: MortonKey, points: np.ndarray) -> np.ndarray:
    return 2.0 * (np.atleast_2d(points) - octant.lower) / octant.side - 1.0


def cheb_eval(c: ChebCoeffs, points: np.ndarray) -> np.ndarray:
    """Evaluate by nested Clenshaw recurrences (numpy's chebval3d)."""
    xi = local_coordinates(c.octant, points)
    if np.any(np.abs(xi) > 1.0 + _EVAL_SLACK):
        raise InvalidArgumentError(f"points outside octant {c.octant}")
    xi = np.clip(xi, -1.0, 1.0)
    return npcheb.chebval3d(xi[:, 0], xi[:, 1], xi[:, 2], c.full())


def truncation_estimate(c: ChebCoeffs) -> float:
    """Absolute sum of the top shell i + j + k = q - 1."""
    top = truncated_indices(c.q).sum(axis=1) == c.q - 1
    return float(np.abs(c.coeffs[top]).sum())


def dump_coeffs(c: ChebCoeffs) -> str:
    """'i j k alpha' lines."""
    return "\n".join(f"{i} {j} {k} {a:.17e}" for (i, j, k), a in zip(truncated_indices(c.q), c.coeffs)) + "\n"


def load_coeffs(text: str, octant: MortonKey) -> ChebCoeffs:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    degree = max(int(i) + int(j) + int(k) for i, j, k, _ in rows)
    q = degree + 1
    lookup = {(int(i), int(j), int(k)): float(a) for i, j, k, a in rows}
    coeffs = np.array([lookup.get(tuple(idx), 0.0) for idx in truncated_indices(q)])
    return ChebCoeffs(q, coeffs, octant)
