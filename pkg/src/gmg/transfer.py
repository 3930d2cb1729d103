"""Intergrid transfer: P(i, j) = phi_j^coarse(p_i), restriction = P^T.

The 3D operators are tensor products of one assembled 1D matrix and are applied
one axis at a time.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..shared.errors import InvalidArgumentError
from .basis import lagrange_values, lgl_nodes
from .mesh import MeshLevel


@lru_cache(maxsize=None)
def prolongation_1d(e_coarse: int, q: int) -> np.ndarray:
    """(2 e q, e q) matrix interpolating coarse nodal values onto the fine nodes."""
    xi = lgl_nodes(q)[:q]
    t = np.concatenate([(xi - 1.0) / 2.0, (xi + 1.0) / 2.0])  # fine owned nodes in coarse reference coords
    phi = lagrange_values(q, t)  # (2q, q + 1)
    n_c, n_f = e_coarse * q, 2 * e_coarse * q
    mat = np.zeros((n_f, n_c))
    for el in range(e_coarse):
        rows = 2 * el * q + np.arange(2 * q)
        cols = (el * q + np.arange(q + 1)) % n_c
        np.add.at(mat, (rows[:, None], cols[None, :]), phi)
    mat.setflags(write=False)
    return mat


def _apply_1d(mat: np.ndarray, u: np.ndarray) -> np.ndarray:
    u = np.einsum("ia,abc->ibc", mat, u)
    u = np.einsum("jb,ibc->ijc", mat, u)
    return np.einsum("kc,ijc->ijk", mat, u)


def _check_adjacent(coarse: MeshLevel, fine: MeshLevel) -> None:
    if coarse.q != fine.q or fine.e != 2 * coarse.e:
        raise InvalidArgumentError(
            f"levels (e={coarse.e}, q={coarse.q}) and (e={fine.e}, q={fine.q}) are not adjacent")


def prolong(coarse: MeshLevel, fine: MeshLevel, u: np.ndarray) -> np.ndarray:
    _check_adjacent(coarse, fine)
    return _apply_1d(prolongation_1d(coarse.e, coarse.q), coarse.check(u))


def restrict(fine: MeshLevel, coarse: MeshLevel, r: np.ndarray) -> np.ndarray:
    _check_adjacent(coarse, fine)
    return _apply_1d(prolongation_1d(coarse.e, coarse.q).T, fine.check(r))
