"""Manufactured solutions for -Delta u = f on the unit cube, and the error metric."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.stats import qmc

from ..shared.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_COUNT = 10_000
_CUBE_SLACK = 1e-12

Evaluable = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TestCase:
    """Either the oscillatory product of sines (kind="osc") or the spherical layer (kind="layer")."""
    __test__ = False  # not a pytest class

    kind: str
    k: int = 1
    alpha: float = 10.0
    radius: float = 0.25
    center: tuple[float, float, float] = field(default=(0.5, 0.5, 0.5))

    def __post_init__(self):
        if self.kind == "osc":
            if int(self.k) != self.k or self.k < 1:
                raise InvalidArgumentError(f"wavenumber must be a positive integer, got {self.k}")
        elif self.kind == "layer":
            if not self.alpha > 2.0:
                raise InvalidArgumentError(f"layer sharpness must exceed 2, got alpha={self.alpha}")
            if not 0.0 < self.radius < 0.5:
                raise InvalidArgumentError(f"layer radius must be in (0, 0.5), got R={self.radius}")
            if any(not 0.0 <= c <= 1.0 for c in self.center):
                raise InvalidArgumentError(f"layer center {self.center} is outside the unit cube")
        else:
            raise InvalidArgumentError(f"unknown test case kind {self.kind!r}")

    @classmethod
    def oscillatory(cls, k: int) -> "TestCase":
        return cls("osc", k=k)

    @classmethod
    def layer(cls, alpha: float, radius: float = 0.25, center=(0.5, 0.5, 0.5)) -> "TestCase":
        return cls("layer", alpha=float(alpha), radius=float(radius), center=tuple(float(c) for c in center))

    @property
    def label(self) -> str:
        if self.kind == "osc":
            return f"osc:k={self.k}"
        label = f"layer:alpha={self.alpha:g},R={self.radius:g}"
        if self.center != (0.5, 0.5, 0.5):
            label += ",center=" + "/".join(f"{c:g}" for c in self.center)
        return label

    @property
    def bandwidth(self) -> int | None:
        """Highest Fourier mode of the exact solution, when it is band-limited."""
        return self.k if self.kind == "osc" else None


def parse_case(text: str) -> TestCase:
    """Parse "osc:k=8" or "layer:alpha=10,R=0.25[,center=x/y/z]"."""
    kind, _, rest = text.strip().partition(":")
    values: dict[str, str] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidArgumentError(f"malformed case parameter {item!r} in {text!r}")
        values[key.strip().lower()] = value.strip()
    try:
        if kind == "osc":
            return TestCase.oscillatory(int(values.get("k", 1)))
        if kind == "layer":
            center = tuple(float(c) for c in values["center"].split("/")) if "center" in values else (0.5, 0.5, 0.5)
            if len(center) != 3:
                raise InvalidArgumentError(f"layer center needs three coordinates, got {values['center']!r}")
            return TestCase.layer(float(values.get("alpha", 10.0)), float(values.get("r", 0.25)), center)
    except ValueError as e:
        if isinstance(e, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"cannot parse test case {text!r}: {e}") from e
    raise InvalidArgumentError(f"unknown test case {text!r}; expected osc:k=.. or layer:alpha=..")


def _points(x) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 3:
        raise InvalidArgumentError(f"points must have 3 coordinates, got shape {pts.shape}")
    if np.any(pts < -_CUBE_SLACK) or np.any(pts > 1.0 + _CUBE_SLACK):
        raise InvalidArgumentError("evaluation point outside the unit cube")
    return pts, single


def _layer_parts(tc: TestCase, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.linalg.norm(pts - np.asarray(tc.center), axis=1)
    s = (r / tc.radius) ** tc.alpha
    return r, s


def exact_u(tc: TestCase, x) -> np.ndarray | float:
    pts, single = _points(x)
    if tc.kind == "osc":
        w = 2.0 * np.pi * tc.k
        u = np.prod(np.sin(w * pts), axis=1)
    else:
        _, s = _layer_parts(tc, pts)
        u = np.exp(-s)
    return float(u[0]) if single else u


def exact_f(tc: TestCase, x) -> np.ndarray | float:
    """f = -Delta u in closed form."""
    pts, single = _points(x)
    if tc.kind == "osc":
        w = 2.0 * np.pi * tc.k
        f = 3.0 * w ** 2 * np.prod(np.sin(w * pts), axis=1)
    else:
        r, s = _layer_parts(tc, pts)
        a = tc.alpha
        # s / r^2 = r^(alpha - 2) / R^alpha vanishes at the center for alpha > 2
        s_over_r2 = r ** (a - 2.0) / tc.radius ** a
        f = a * s_over_r2 * (a + 1.0 - a * s) * np.exp(-s)
    return float(f[0]) if single else f


def source_function(tc: TestCase) -> Callable[[np.ndarray], np.ndarray]:
    """exact_f as a vectorized callable of (N, 3) points."""
    return lambda pts: exact_f(tc, pts)


def halton_samples(count: int = DEFAULT_SAMPLE_COUNT, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in [0, 1)^3, reproducible for a fixed seed."""
    if count < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {count}")
    return qmc.Halton(d=3, scramble=True, seed=seed).random(count)


@dataclass
class ErrorMeasure:
    linf_rel: float
    gauge_shift: float  # constant added to the numerical solution before comparing


def measure_error(u_num: Evaluable, tc: TestCase, samples: np.ndarray) -> ErrorMeasure:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if len(samples) == 0:
        raise InvalidArgumentError("error needs at least one sample point")
    exact = exact_u(tc, samples)
    numeric = np.asarray(u_num(samples) if callable(u_num) else u_num, dtype=float).ravel()
    if numeric.shape != exact.shape:
        raise InvalidArgumentError(f"{numeric.size} numerical values for {exact.size} samples")
    scale = float(np.max(np.abs(exact)))
    if scale == 0.0 or not np.isfinite(scale):
        raise InvalidArgumentError("exact solution vanishes on the sample set")
    shift = float(np.mean(exact - numeric))
    err = float(np.max(np.abs(numeric + shift - exact))) / scale
    logger.debug("%s: linf_rel=%.3e gauge shift=%.3e over %d samples", tc.label, err, shift, len(samples))
    return ErrorMeasure(err, shift)


def linf_rel_error(u_num: Evaluable, tc: TestCase, samples: np.ndarray) -> float:
    """max |u_num + c - u| / max |u| over the samples, c aligning the sample means."""
    return measure_error(u_num, tc, samples).linf_rel
