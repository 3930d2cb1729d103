"""U/V/W/X interaction lists over a balanced octree.

An interaction partner is an image: an octant plus the unit-cell translation
(shift) it is seen through. Shifts are always (0, 0, 0) for free-space trees;
with periodic wraparound they lie in {-1, 0, 1}^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..shared.errors import PreconditionError
from .morton import MAX_DEPTH, NEIGHBOR_OFFSETS, MortonKey
from .tree import Octree

Shift = tuple[int, int, int]
Image = tuple[MortonKey, Shift]

ZERO_SHIFT: Shift = (0, 0, 0)


def _bounds(key: MortonKey, shift: Shift, depth: int) -> tuple[list[int], list[int]]:
    scale = 1 << (depth - key.level)
    lo = [a * scale + s * (1 << depth) for a, s in zip(key.anchor, shift)]
    return lo, [c + scale for c in lo]


def images_adjacent(a: MortonKey, sa: Shift, b: MortonKey, sb: Shift) -> bool:
    """Closed boxes touch or overlap (26-connectivity, self included)."""
    depth = max(a.level, b.level)
    lo_a, hi_a = _bounds(a, sa, depth)
    lo_b, hi_b = _bounds(b, sb, depth)
    return all(la <= hb and lb <= ha for la, ha, lb, hb in zip(lo_a, hi_a, lo_b, hi_b))


def _image_order(image: Image) -> tuple:
    key, shift = image
    return (key.sort_key, shift)


@dataclass(frozen=True)
class InteractionLists:
    periodic: bool
    octants: list[MortonKey]
    leaves: list[MortonKey]
    u: dict[MortonKey, list[Image]] = field(default_factory=dict)
    v: dict[MortonKey, list[Image]] = field(default_factory=dict)
    w: dict[MortonKey, list[Image]] = field(default_factory=dict)
    x: dict[MortonKey, list[Image]] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        return {
            "n_leaf": len(self.leaves),
            "n_oct": len(self.octants),
            "n_u": sum(len(v) for v in self.u.values()),
            "n_v": sum(len(v) for v in self.v.values()),
            "n_w": sum(len(v) for v in self.w.values()),
            "n_x": sum(len(v) for v in self.x.values()),
        }


def build_interaction_lists(tree: Octree, periodic: bool) -> InteractionLists:
    if not tree.balanced:
        raise PreconditionError("interaction lists need a 2:1 balanced tree")
    if tree.depth > MAX_DEPTH:
        raise PreconditionError(f"tree deeper than {MAX_DEPTH}")

    octants = tree.octants()
    node_set = set(octants)

    def colleagues(key: MortonKey) -> list[Image]:
        out = []
        for offset in NEIGHBOR_OFFSETS:
            found = key.neighbor(offset, periodic)
            if found is not None and found[0] in node_set:
                out.append(found)
        return out

    v_lists: dict[MortonKey, list[Image]] = {}
    for key in octants:
        if key.level == 0:
            v_lists[key] = []
            continue
        entries = []
        for pkey, shift in colleagues(key.parent()):
            if tree.is_leaf(pkey):
                continue
            for child in pkey.children():
                if not images_adjacent(key, ZERO_SHIFT, child, shift):
                    entries.append((child, shift))
        v_lists[key] = sorted(entries, key=_image_order)

    u_lists: dict[MortonKey, list[Image]] = {}
    w_lists: dict[MortonKey, list[Image]] = {}
    x_lists: dict[MortonKey, list[Image]] = {key: [] for key in octants}
    for leaf in tree.leaves:
        near: set[Image] = set()
        far: list[Image] = []

        def descend(node: MortonKey, shift: Shift) -> None:
            for child in node.children():
                if images_adjacent(leaf, ZERO_SHIFT, child, shift):
                    if tree.is_leaf(child):
                        near.add((child, shift))
                    else:
                        descend(child, shift)
                else:
                    far.append((child, shift))

        for offset in NEIGHBOR_OFFSETS:
            found = leaf.neighbor(offset, periodic)
            if found is None:
                continue
            key, shift = found
            if key in node_set:
                if tree.is_leaf(key):
                    near.add((key, shift))
                else:
                    descend(key, shift)
            else:
                coarse = tree.covering_leaf(key)
                if coarse is not None:
                    near.add((coarse, shift))

        u_lists[leaf] = sorted(near, key=_image_order)
        w_lists[leaf] = sorted(far, key=_image_order)
        for source, shift in w_lists[leaf]:
            x_lists[source].append((leaf, (-shift[0], -shift[1], -shift[2])))

    for key in x_lists:
        x_lists[key].sort(key=_image_order)

    return InteractionLists(periodic, octants, list(tree.leaves), u_lists, v_lists, w_lists, x_lists)
