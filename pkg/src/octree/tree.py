"""Linear octree construction, adaptive refinement and 2:1 balancing."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..chebyshev.approx import cheb_approx, octant_nodes, truncation_estimate
from ..shared.errors import InvalidArgumentError
from ..shared.types import ToleranceMode
from .morton import NEIGHBOR_OFFSETS, ROOT, MortonKey, morton_encode

logger = logging.getLogger(__name__)

Reapproximate = Callable[[MortonKey], Any]


@dataclass
class Octree:
    """Morton-sorted leaves that partition the unit cube, plus per-leaf payload."""
    leaves: list[MortonKey]
    max_depth: int
    balanced: bool = False
    payload: dict[MortonKey, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.leaves = sorted(set(self.leaves))
        self._leaf_set = frozenset(self.leaves)

    @property
    def depth(self) -> int:
        return max(k.level for k in self.leaves)

    def is_leaf(self, key: MortonKey) -> bool:
        return key in self._leaf_set

    def covering_leaf(self, key: MortonKey) -> MortonKey | None:
        """The leaf equal to or containing `key`; None if `key` is subdivided further."""
        for level in range(key.level, -1, -1):
            candidate = key.ancestor(level)
            if candidate in self._leaf_set:
                return candidate
        return None

    def octants(self) -> list[MortonKey]:
        """All leaves and their ancestors, Morton-sorted."""
        nodes = set(self.leaves)
        for leaf in self.leaves:
            key = leaf
            while key.level > 0:
                key = key.parent()
                if key in nodes:
                    break
                nodes.add(key)
        return sorted(nodes)

    def locate(self, points: np.ndarray) -> list[MortonKey]:
        """Leaf containing each point (points on shared faces go to the upper octant)."""
        pts = np.clip(np.atleast_2d(points), 0.0, np.nextafter(1.0, 0.0))
        depth = self.depth
        cells = np.floor(pts * (1 << depth)).astype(int)
        out = []
        for cx, cy, cz in cells:
            leaf = self.covering_leaf(MortonKey(depth, int(cx), int(cy), int(cz)))
            if leaf is None:
                raise InvalidArgumentError("tree does not cover the unit cube")
            out.append(leaf)
        return out

    def with_payload(self, payload: dict[MortonKey, Any]) -> Octree:
        return Octree(list(self.leaves), self.max_depth, self.balanced, dict(payload), list(self.warnings))


def uniform_tree(depth: int) -> Octree:
    n = 1 << depth
    leaves = [morton_encode(depth, (x, y, z)) for x in range(n) for y in range(n) for z in range(n)]
    return Octree(leaves, max_depth=depth)


def is_complete(tree: Octree) -> bool:
    """Volume sums to one and no leaf contains another."""
    volume = sum(8.0 ** (-k.level) for k in tree.leaves)
    if abs(volume - 1.0) > 1e-12:
        return False
    return not any(a.is_ancestor_of(b) for a, b in zip(tree.leaves, tree.leaves[1:]))


def refine_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    q: int,
    tol: float,
    max_depth: int,
    tol_mode: ToleranceMode = ToleranceMode.RELATIVE,
    min_depth: int = 0,
) -> Octree:
    """Split octants (all eight children at once) until the truncation estimate meets tol."""
    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2, got {q}")
    if tol <= 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    if not 0 <= min_depth <= max_depth:
        raise InvalidArgumentError(f"need 0 <= min_depth <= max_depth, got {min_depth}, {max_depth}")

    root = cheb_approx(f, ROOT, q)
    threshold = tol
    if tol_mode == ToleranceMode.RELATIVE:
        scale = float(np.max(np.abs(f(octant_nodes(ROOT, q)))))
        threshold = tol * (scale if scale > 0 else 1.0)

    payload: dict[MortonKey, Any] = {}
    unresolved = 0
    pending = [(ROOT, root)]
    while pending:
        key, coeffs = pending.pop()
        estimate = truncation_estimate(coeffs)
        if key.level < min_depth or (estimate > threshold and key.level < max_depth):
            pending.extend((child, cheb_approx(f, child, q)) for child in key.children())
            continue
        if estimate > threshold:
            unresolved += 1
        payload[key] = coeffs

    tree = Octree(list(payload), max_depth=max_depth, payload=payload)
    if unresolved:
        tree.warnings.append(f"{unresolved} leaves at max depth {max_depth} exceed tolerance {threshold:.3e}")
        logger.warning(tree.warnings[-1])
    logger.debug("refined to %d leaves (depth %d)", len(tree.leaves), tree.depth)
    return tree


def balance_2to1(tree: Octree, periodic: bool, reapproximate: Reapproximate | None = None) -> Octree:
    """Ripple-split coarse leaves until 26-adjacent leaves differ by at most one level.

    Every round rescans all leaves; the loop ends when a round splits nothing.
    """
    leaves = set(tree.leaves)

    def covering(key: MortonKey) -> MortonKey | None:
        for level in range(key.level, -1, -1):
            candidate = key.ancestor(level)
            if candidate in leaves:
                return candidate
        return None

    created: set[MortonKey] = set()
    rounds = 0
    while True:
        to_split: set[MortonKey] = set()
        for leaf in leaves:
            for offset in NEIGHBOR_OFFSETS:
                if offset == (0, 0, 0):
                    continue
                found = leaf.neighbor(offset, periodic)
                if found is None:
                    continue
                coarse = covering(found[0])
                if coarse is not None and coarse.level < leaf.level - 1:
                    to_split.add(coarse)
        if not to_split:
            break
        rounds += 1
        for key in to_split:
            leaves.discard(key)
            created.discard(key)
            children = key.children()
            leaves.update(children)
            created.update(children)

    payload = {k: v for k, v in tree.payload.items() if k in leaves}
    if reapproximate is not None:
        for key in created:
            payload[key] = reapproximate(key)

    result = Octree(list(leaves), max(tree.max_depth, max(k.level for k in leaves)), True,
                    payload, list(tree.warnings))
    if created:
        logger.debug("balance added %d leaves in %d rounds", len(result.leaves) - len(tree.leaves), rounds)
    return result


def dump_tree(tree: Octree) -> str:
    """One 'level x y z' line per leaf in Morton order."""
    return "\n".join(str(k) for k in tree.leaves) + "\n"


def load_tree(text: str) -> Octree:
    keys = []
    for line in text.splitlines():
        if line.strip():
            level, x, y, z = (int(v) for v in line.split())
            keys.append(morton_encode(level, (x, y, z)))
    tree = Octree(keys, max_depth=max(k.level for k in keys))
    if not is_complete(tree):
        raise InvalidArgumentError("leaves do not partition the unit cube")
    return tree
