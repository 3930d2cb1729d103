"""Uniform periodic mesh of order-q hexahedral elements with matrix-free operators.

Nodal fields are (n, n, n) arrays with n = e * q owned nodes per axis: element
E owns its local nodes 0..q-1 along each axis; its last local node q is node 0
of element E + 1 (periodically). Element-local arrays use the layout
(e, q + 1, e, q + 1, e, q + 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from ..shared.errors import InvalidArgumentError
from .basis import lagrange_values, lgl_nodes, reference_matrices

# Contractions of a 1D matrix with the local index of each axis.
_AXIS_EINSUM = (
    "ia,xaybzc->xiybzc",
    "ja,xiyazc->xiyjzc",
    "ka,xiyjza->xiyjzk",
)


def _gather_axis(arr: np.ndarray, axis: int, e: int, q: int) -> np.ndarray:
    moved = np.moveaxis(arr, axis, 0)
    blocks = moved.reshape((e, q) + moved.shape[1:])
    closing = np.roll(blocks[:, 0], -1, axis=0)[:, None]
    local = np.concatenate([blocks, closing], axis=1)
    return np.moveaxis(local, (0, 1), (axis, axis + 1))


def _scatter_axis(local: np.ndarray, axis: int, e: int, q: int) -> np.ndarray:
    moved = np.moveaxis(local, (axis, axis + 1), (0, 1))
    out = moved[:, :q].copy()
    out[:, 0] += np.roll(moved[:, q], 1, axis=0)
    out = out.reshape((e * q,) + moved.shape[2:])
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class MeshLevel:
    e: int  # elements per axis
    q: int  # element order

    def __post_init__(self):
        if self.e < 1 or self.e & (self.e - 1):
            raise InvalidArgumentError(f"elements per axis must be a power of two, got {self.e}")
        lgl_nodes(self.q)

    @property
    def h(self) -> float:
        return 1.0 / self.e

    @property
    def n(self) -> int:
        """Owned nodes per axis."""
        return self.e * self.q

    @property
    def size(self) -> int:
        return self.n ** 3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n,) * 3

    @cached_property
    def coordinates(self) -> np.ndarray:
        """1D node coordinates in [0, 1)."""
        local = 0.5 * (lgl_nodes(self.q)[: self.q] + 1.0)
        return ((np.arange(self.e)[:, None] + local[None, :]) * self.h).ravel()

    def nodes(self) -> np.ndarray:
        x = self.coordinates
        return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)

    def interpolate(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return np.asarray(f(self.nodes()), dtype=float).reshape(self.shape)

    def check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.shape:
            raise InvalidArgumentError(f"field of shape {u.shape} does not live on level e={self.e}, q={self.q}")
        return u

    # --- element gather / scatter ---

    def gather(self, u: np.ndarray) -> np.ndarray:
        for axis in (0, 2, 4):
            u = _gather_axis(u, axis, self.e, self.q)
        return u

    def scatter(self, local: np.ndarray) -> np.ndarray:
        for axis in (4, 2, 0):
            local = _scatter_axis(local, axis, self.e, self.q)
        return local

    # --- operators ---

    def apply_operator(self, u: np.ndarray) -> np.ndarray:
        """Stiffness operator of -Delta, by per-element sum factorization."""
        ul = self.gather(self.check(u))
        mass, stiff = reference_matrices(self.q)
        sx, sy, sz = _AXIS_EINSUM
        kx = np.einsum(sx, stiff, ul)
        mx = np.einsum(sx, mass, ul)
        mxmy = np.einsum(sy, mass, mx)
        yz = np.einsum(sy, mass, kx) + np.einsum(sy, stiff, mx)
        out = np.einsum(sz, mass, yz) + np.einsum(sz, stiff, mxmy)
        return self.scatter(0.5 * self.h * out)

    def apply_mass(self, u: np.ndarray) -> np.ndarray:
        ul = self.gather(self.check(u))
        mass, _ = reference_matrices(self.q)
        for s in _AXIS_EINSUM:
            ul = np.einsum(s, mass, ul)
        return self.scatter((0.5 * self.h) ** 3 * ul)

    def diagonal(self) -> np.ndarray:
        mass, stiff = reference_matrices(self.q)
        md, kd = np.diag(mass), np.diag(stiff)
        elem = 0.5 * self.h * (np.einsum("a,b,c->abc", kd, md, md)
                               + np.einsum("a,b,c->abc", md, kd, md)
                               + np.einsum("a,b,c->abc", md, md, kd))
        e = self.e
        local = np.broadcast_to(elem[None, :, None, :, None, :], (e, self.q + 1, e, self.q + 1, e, self.q + 1))
        return self.scatter(np.array(local))

    def dense_1d(self) -> tuple[np.ndarray, np.ndarray]:
        """Assembled periodic 1D mass and stiffness matrices (n x n)."""
        mass, stiff = reference_matrices(self.q)
        n, q = self.n, self.q
        m1 = np.zeros((n, n))
        k1 = np.zeros((n, n))
        for el in range(self.e):
            idx = (el * q + np.arange(q + 1)) % n
            np.add.at(m1, np.ix_(idx, idx), 0.5 * self.h * mass)
            np.add.at(k1, np.ix_(idx, idx), 2.0 * self.e * stiff)
        return m1, k1

    def dense_operator(self) -> np.ndarray:
        """Assembled 3D stiffness from the tensor structure K x M x M + M x K x M + M x M x K."""
        m1, k1 = self.dense_1d()
        return (np.kron(np.kron(k1, m1), m1) + np.kron(np.kron(m1, k1), m1) + np.kron(np.kron(m1, m1), k1))

    def mass_weights(self) -> np.ndarray:
        """Row sums of the mass matrix: integral of each nodal basis function."""
        return self.apply_mass(np.ones(self.shape))

    def mean(self, u: np.ndarray) -> float:
        """Mass-weighted mean of the finite element function."""
        return float(np.sum(self.mass_weights() * u))

    # --- point evaluation ---

    def evaluate(self, u: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate the finite element function at arbitrary points of the unit cube."""
        u = self.check(u)
        points = np.atleast_2d(points)
        scaled = np.mod(points, 1.0) * self.e
        elem = np.minimum(np.floor(scaled).astype(int), self.e - 1)
        xi = 2.0 * (scaled - elem) - 1.0
        ax = [lagrange_values(self.q, xi[:, d]) for d in range(3)]
        idx = [(elem[:, d, None] * self.q + np.arange(self.q + 1)[None, :]) % self.n for d in range(3)]
        vals = u[idx[0][:, :, None, None], idx[1][:, None, :, None], idx[2][:, None, None, :]]
        return np.einsum("pabc,pa,pb,pc->p", vals, ax[0], ax[1], ax[2])
