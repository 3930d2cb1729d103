"""Precomputed near-interaction (U-list) tables.

A table maps the truncated Chebyshev coefficients of a touching source leaf to
potential values at the q^3 Chebyshev nodes of the target leaf. Tables are built
for a unit target box centered at the origin and scaled by s^2 for a target of
side s. Source placement is keyed by the level difference (source minus target)
and the center offset in quarters of the target side. The cube's reflections
and axis permutations reduce the admissible placements to ten canonical ones.
"""

from __future__ import annotations

import hashlib
import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np

from ..chebyshev.approx import cheb_nodes, truncation_mask
from ..octree.morton import MortonKey
from ..shared.errors import InternalStateError, InvalidArgumentError
from .quadrature import box_integrals

logger = logging.getLogger(__name__)

Offset = tuple[int, int, int]
TableKey = tuple[int, Offset]

CACHE_VERSION = 1


def admissible_offsets(level_diff: int) -> list[Offset]:
    """Quarter-unit center offsets of touching sources allowed by 2:1 balance."""
    if level_diff == 0:
        values, needs = (-4, 0, 4), 4
    elif level_diff == 1:
        values, needs = (-3, -1, 1, 3), 3
    elif level_diff == -1:
        values, needs = (-6, -2, 2, 6), 6
    else:
        raise InvalidArgumentError(f"level difference {level_diff} not admitted by 2:1 balance")
    out = [o for o in product(values, repeat=3) if level_diff == 0 or max(abs(c) for c in o) == needs]
    return out


def canonical_offset(offset: Offset) -> tuple[Offset, tuple[bool, bool, bool], tuple[int, int, int]]:
    """Reflect to nonnegative components, then sort descending. Returns (canonical, flips, perm)."""
    flips = tuple(c < 0 for c in offset)
    mag = [abs(c) for c in offset]
    perm = tuple(sorted(range(3), key=lambda e: (-mag[e], e)))
    return tuple(mag[p] for p in perm), flips, perm


def canonical_classes() -> list[TableKey]:
    keys = set()
    for level_diff in (-1, 0, 1):
        for offset in admissible_offsets(level_diff):
            keys.add((level_diff, canonical_offset(offset)[0]))
    return sorted(keys)


def unit_target_nodes(q: int) -> np.ndarray:
    x = 0.5 * cheb_nodes(q)
    return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)


def direct_table(q: int, level_diff: int, offset: Offset) -> np.ndarray:
    """Full (q, q, q, q, q, q) tensor by direct quadrature: target node axes, then mode axes."""
    side = 2.0 ** (-level_diff)
    center = np.asarray(offset, dtype=float) / 4.0
    lower, upper = center - 0.5 * side, center + 0.5 * side
    label = f"(level_diff={level_diff}, offset={offset})"
    out = np.empty((q ** 3, q, q, q))
    for n, t in enumerate(unit_target_nodes(q)):
        out[n] = box_integrals(t, lower, upper, lower, side, q, label=label)
    return out.reshape((q,) * 6)


def derive_from_canonical(table: np.ndarray, flips, perm) -> np.ndarray:
    """Map a canonical full tensor back to the original orientation."""
    inverse = np.argsort(perm)
    axes = [int(inverse[e]) for e in range(3)] + [3 + int(inverse[e]) for e in range(3)]
    out = np.transpose(table, axes)
    q = table.shape[0]
    sign = (-1.0) ** np.arange(q)
    for e in range(3):
        if flips[e]:
            out = np.flip(out, axis=e)
            shape = [1] * 6
            shape[3 + e] = q
            out = out * sign.reshape(shape)
    return out


class NearTable:
    """Canonical near tables for one order q, with derived orientations memoized."""

    def __init__(self, q: int, canonical: dict[TableKey, np.ndarray]):
        self.q = q
        self._canonical = canonical
        self._derived: dict[TableKey, np.ndarray] = {}

    @property
    def classes(self) -> list[TableKey]:
        return sorted(self._canonical)

    def full(self, level_diff: int, offset: Offset) -> np.ndarray:
        canon, flips, perm = canonical_offset(offset)
        key = (level_diff, canon)
        if key not in self._canonical:
            raise InternalStateError(f"no near table for level_diff={level_diff}, offset={offset}")
        return derive_from_canonical(self._canonical[key], flips, perm)

    def matrix(self, level_diff: int, offset: Offset) -> np.ndarray:
        """(q^3, n_coeffs) unit-scale map from truncated coefficients to target node values."""
        key = (level_diff, tuple(offset))
        mat = self._derived.get(key)
        if mat is None:
            full = self.full(level_diff, offset).reshape(self.q ** 3, self.q ** 3)
            mat = np.ascontiguousarray(full[:, truncation_mask(self.q)])
            self._derived[key] = mat
        return mat

    def apply(self, target: MortonKey, source: MortonKey, shift, coeffs: np.ndarray) -> np.ndarray:
        """Potential at the target's nodes due to the source image (target-scale s^2 applied)."""
        level_diff, offset = relative_placement(target, source, shift)
        return target.side ** 2 * (self.matrix(level_diff, offset) @ coeffs)


def relative_placement(target: MortonKey, source: MortonKey, shift=(0, 0, 0)) -> tuple[int, Offset]:
    level_diff = source.level - target.level
    delta = (source.center + np.asarray(shift, dtype=float) - target.center) / target.side
    quarters = np.rint(4.0 * delta).astype(int)
    return level_diff, (int(quarters[0]), int(quarters[1]), int(quarters[2]))


def _cache_path(cache_dir: str, q: int) -> str:
    tag = hashlib.sha256(repr((CACHE_VERSION, q, canonical_classes())).encode()).hexdigest()[:16]
    return os.path.join(cache_dir, f"near_q{q}_{tag}.npz")


def _checksum(arrays: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    for name in sorted(arrays):
        h.update(name.encode())
        h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()


def _load(path: str, q: int) -> dict[TableKey, np.ndarray] | None:
    if not os.path.exists(path):
        return None
    try:
        with np.load(path) as data:
            arrays = {name: data[name] for name in data.files if name != "checksum"}
            stored = str(data["checksum"])
    except (OSError, ValueError, KeyError) as e:
        logger.warning("unreadable near-table cache %s: %s", path, e)
        return None
    if stored != _checksum(arrays):
        logger.warning("checksum mismatch in %s, regenerating", path)
        return None
    tables = {}
    for level_diff, canon in canonical_classes():
        name = _array_name(level_diff, canon)
        if name not in arrays or arrays[name].shape != (q,) * 6:
            return None
        tables[(level_diff, canon)] = arrays[name]
    return tables


def _array_name(level_diff: int, canon: Offset) -> str:
    return f"d{level_diff:+d}_" + "_".join(str(c) for c in canon)


def _save(path: str, tables: dict[TableKey, np.ndarray]) -> None:
    arrays = {_array_name(ld, canon): t for (ld, canon), t in tables.items()}
    buffer = io.BytesIO()
    np.savez(buffer, checksum=np.array(_checksum(arrays)), **arrays)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(buffer.getvalue())
    os.replace(tmp, path)


def precompute_near_tables(q: int, m: int | None = None, cache_dir: str | None = None,
                           workers: int = 1) -> NearTable:
    """Build (or load from `cache_dir`) the ten canonical near tables for order q.

    `m` does not influence the tables; it is accepted so callers can pass FMM
    parameters through unchanged.
    """
    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2, got {q}")
    path = _cache_path(cache_dir, q) if cache_dir else None
    if path:
        tables = _load(path, q)
        if tables is not None:
            logger.info("loaded near tables for q=%d from %s", q, path)
            return NearTable(q, tables)

    classes = canonical_classes()
    logger.info("computing %d near tables for q=%d", len(classes), q)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda key: direct_table(q, *key), classes))
    else:
        results = [direct_table(q, *key) for key in classes]
    tables = dict(zip(classes, results))

    if path:
        _save(path, tables)
        logger.debug("stored near tables in %s", path)
    return NearTable(q, tables)
