"""Morton keys for linear octrees on the unit cube."""

from dataclasses import dataclass
from functools import total_ordering
from itertools import product

import numpy as np

from ..shared.errors import InvalidArgumentError

MAX_DEPTH = 21  # 3 x 21 interleaved bits fill a 64-bit word
_LEVEL_BITS = 5

# Face, edge and corner offsets (26-connectivity) plus the zero offset.
NEIGHBOR_OFFSETS: tuple[tuple[int, int, int], ...] = tuple(product((-1, 0, 1), repeat=3))


def _spread(v: int) -> int:
    out = 0
    for bit in range(MAX_DEPTH):
        out |= ((v >> bit) & 1) << (3 * bit)
    return out


def _compact(code: int) -> int:
    out = 0
    for bit in range(MAX_DEPTH):
        out |= ((code >> (3 * bit)) & 1) << bit
    return out


@total_ordering
@dataclass(frozen=True)
class MortonKey:
    """An octant: depth plus integer anchor of its lower corner."""
    level: int
    x: int
    y: int
    z: int

    @property
    def anchor(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)

    @property
    def code(self) -> int:
        """Interleaved anchor bits at the finest depth (x lowest)."""
        shift = MAX_DEPTH - self.level
        return (_spread(self.x << shift)
                | (_spread(self.y << shift) << 1)
                | (_spread(self.z << shift) << 2))

    @property
    def packed(self) -> int:
        return (self.code << _LEVEL_BITS) | self.level

    @property
    def sort_key(self) -> tuple[int, int]:
        # Ancestors share the code of their first descendant and sort first.
        return (self.code, self.level)

    def __lt__(self, other: "MortonKey") -> bool:
        return self.sort_key < other.sort_key

    # --- geometry ---

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.anchor, dtype=float) * self.side

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.anchor, dtype=float) + 0.5) * self.side

    def contains_points(self, points: np.ndarray, slack: float = 1e-12) -> np.ndarray:
        lo = self.lower
        rel = (np.atleast_2d(points) - lo) / self.side
        return np.all((rel >= -slack) & (rel <= 1.0 + slack), axis=1)

    # --- hierarchy ---

    def parent(self) -> "MortonKey":
        if self.level == 0:
            raise InvalidArgumentError("root octant has no parent")
        return MortonKey(self.level - 1, self.x >> 1, self.y >> 1, self.z >> 1)

    @property
    def child_index(self) -> int:
        return (self.x & 1) | ((self.y & 1) << 1) | ((self.z & 1) << 2)

    def children(self) -> list["MortonKey"]:
        if self.level >= MAX_DEPTH:
            raise InvalidArgumentError(f"cannot refine beyond depth {MAX_DEPTH}")
        base = (2 * self.x, 2 * self.y, 2 * self.z)
        return [
            MortonKey(self.level + 1, base[0] + (c & 1), base[1] + ((c >> 1) & 1), base[2] + ((c >> 2) & 1))
            for c in range(8)
        ]

    def ancestor(self, level: int) -> "MortonKey":
        shift = self.level - level
        if shift < 0:
            raise InvalidArgumentError(f"level {level} is finer than {self}")
        return MortonKey(level, self.x >> shift, self.y >> shift, self.z >> shift)

    def is_ancestor_of(self, other: "MortonKey") -> bool:
        """True for strict ancestors only."""
        return other.level > self.level and other.ancestor(self.level) == self

    def neighbor(self, offset: tuple[int, int, int], periodic: bool) -> tuple["MortonKey", tuple[int, int, int]] | None:
        """Same-level octant at `offset`, with the unit-cell image shift it was wrapped by.

        Returns None when the neighbor falls outside the cube and `periodic` is off.
        """
        n = 1 << self.level
        raw = (self.x + offset[0], self.y + offset[1], self.z + offset[2])
        if not periodic:
            if any(c < 0 or c >= n for c in raw):
                return None
            return MortonKey(self.level, *raw), (0, 0, 0)
        shift = tuple(c // n for c in raw)
        wrapped = tuple(c % n for c in raw)
        return MortonKey(self.level, *wrapped), shift

    def __str__(self) -> str:
        return f"{self.level} {self.x} {self.y} {self.z}"


ROOT = MortonKey(0, 0, 0, 0)


def morton_encode(level: int, anchor: tuple[int, int, int]) -> MortonKey:
    """Validated constructor for a key."""
    if not 0 <= level <= MAX_DEPTH:
        raise InvalidArgumentError(f"level {level} outside [0, {MAX_DEPTH}]")
    n = 1 << level
    if len(anchor) != 3 or any(not 0 <= int(c) < n for c in anchor):
        raise InvalidArgumentError(f"anchor {anchor} out of range for level {level}")
    return MortonKey(level, int(anchor[0]), int(anchor[1]), int(anchor[2]))


def morton_decode(packed: int) -> MortonKey:
    """Inverse of `MortonKey.packed`."""
    level = packed & ((1 << _LEVEL_BITS) - 1)
    if level > MAX_DEPTH:
        raise InvalidArgumentError(f"packed key carries invalid level {level}")
    code = packed >> _LEVEL_BITS
    shift = MAX_DEPTH - level
    x = _compact(code) >> shift
    y = _compact(code >> 1) >> shift
    z = _compact(code >> 2) >> shift
    return morton_encode(level, (x, y, z))
