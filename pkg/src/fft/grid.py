"""Uniform periodic grid samples and their file formats."""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..shared.errors import InvalidArgumentError

MAGIC = b"GRID"
_HEADER = struct.Struct("<4sq")


def grid_points(n: int) -> np.ndarray:
    """(n^3, 3) sample points x = (i/n, j/n, k/n), first index slowest."""
    x = np.arange(n) / n
    return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)


@dataclass(frozen=True)
class GridField:
    """Real samples of a periodic function on the n^3 grid."""
    n: int
    data: np.ndarray  # (n, n, n)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError(f"grid needs n >= 2, got {self.n}")
        data = np.asarray(self.data, dtype=float)
        if data.size != self.n ** 3:
            raise InvalidArgumentError(f"expected {self.n ** 3} samples, got {data.size}")
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("grid samples must be finite")
        data = data.reshape(self.n, self.n, self.n)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], n: int) -> GridField:
        return cls(n, np.asarray(f(grid_points(n)), dtype=float))

    @property
    def size(self) -> int:
        return self.n ** 3

    def mean(self) -> float:
        return float(self.data.mean())


def dump_grid(g: GridField) -> bytes:
    """Header (magic, int64 n) followed by row-major little-endian doubles."""
    return _HEADER.pack(MAGIC, g.n) + g.data.astype("<f8").tobytes(order="C")


def load_grid(blob: bytes) -> GridField:
    if len(blob) < _HEADER.size:
        raise InvalidArgumentError("grid dump too short")
    magic, n = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise InvalidArgumentError(f"bad grid magic {magic!r}")
    data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    return GridField(int(n), data.copy())


def grid_csv(g: GridField, stride: int = 1) -> str:
    """'x,y,z,value' rows of every `stride`-th sample per axis, for plotting."""
    buffer = io.StringIO()
    buffer.write("x,y,z,value\n")
    idx = range(0, g.n, max(stride, 1))
    for i in idx:
        for j in idx:
            for k in idx:
                buffer.write(f"{i / g.n:.6f},{j / g.n:.6f},{k / g.n:.6f},{g.data[i, j, k]:.17e}\n")
    return buffer.getvalue()
