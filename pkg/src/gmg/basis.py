"""1D Legendre-Gauss-Lobatto nodal basis and reference element matrices."""

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg

from ..shared.errors import InvalidArgumentError

MAX_ORDER = 16


@lru_cache(maxsize=None)
def lgl_nodes(q: int) -> np.ndarray:
    """q + 1 LGL points on [-1, 1]: the endpoints and the roots of P_q'."""
    if not 1 <= q <= MAX_ORDER:
        raise InvalidArgumentError(f"element order must be in [1, {MAX_ORDER}], got {q}")
    inner = npleg.Legendre.basis(q).deriv().roots() if q > 1 else np.array([])
    nodes = np.concatenate(([-1.0], np.sort(inner.real), [1.0]))
    nodes.setflags(write=False)
    return nodes


@lru_cache(maxsize=None)
def _lagrange_coefficients(q: int) -> np.ndarray:
    """Legendre coefficients of each Lagrange basis function (one per column)."""
    return np.linalg.inv(npleg.legvander(lgl_nodes(q), q))


def lagrange_values(q: int, x: np.ndarray) -> np.ndarray:
    """phi_a(x) for a = 0..q, shape x.shape + (q + 1,)."""
    x = np.asarray(x, dtype=float)
    return npleg.legvander(x, q) @ _lagrange_coefficients(q)


def lagrange_derivatives(q: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    coeffs = npleg.legder(_lagrange_coefficients(q), axis=0)
    return np.moveaxis(npleg.legval(x, coeffs), 0, -1)


@lru_cache(maxsize=None)
def reference_matrices(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Mass and stiffness on [-1, 1] by (q + 1)-point Gauss-Legendre quadrature."""
    xg, wg = npleg.leggauss(q + 1)
    b = lagrange_values(q, xg)
    d = lagrange_derivatives(q, xg)
    mass = b.T @ (wg[:, None] * b)
    stiff = d.T @ (wg[:, None] * d)
    mass.setflags(write=False)
    stiff.setflags(write=False)
    return mass, stiff
