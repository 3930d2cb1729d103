"""Spectral Poisson inversion on the periodic unit cube."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from ..shared.errors import InvalidArgumentError
from .grid import GridField

logger = logging.getLogger(__name__)

_EVAL_BLOCK = 1 << 22  # complex entries per evaluation block


def signed_frequencies(n: int) -> np.ndarray:
    """Integer frequencies in (-n/2, n/2]; the Nyquist mode sits at +n/2."""
    k = np.fft.fftfreq(n, d=1.0 / n).round().astype(int)
    if n % 2 == 0:
        k[n // 2] = n // 2
    return k


def dft3_forward(g: GridField, workers: int = 1) -> np.ndarray:
    """g_hat[k] = sum_x g(x) exp(-2 pi i k.x / n), full complex (n, n, n) spectrum."""
    return scipy.fft.fftn(g.data, workers=workers)


def dft3_inverse(spectrum: np.ndarray, workers: int = 1) -> GridField:
    spectrum = np.asarray(spectrum)
    return GridField(spectrum.shape[0], scipy.fft.ifftn(spectrum, workers=workers).real)


def trig_interpolate(spectrum: np.ndarray, points: np.ndarray, half: bool = False) -> np.ndarray:
    """Evaluate the trigonometric interpolant of a spectrum at arbitrary points.

    `half` marks an rfft-layout spectrum (last axis n // 2 + 1). Each block of
    points costs one matrix product over the last axis and two 1-D sums.
    """
    n = spectrum.shape[0]
    k = signed_frequencies(n)
    kz = k[: spectrum.shape[2]]
    flat = spectrum
    if half:
        weights = np.full(kz.size, 2.0)
        weights[0] = 1.0
        if n % 2 == 0:
            weights[n // 2] = 1.0
        flat = spectrum * weights
    flat = flat.reshape(n * n, kz.size)

    points = np.atleast_2d(points)
    out = np.empty(len(points))
    block = max(1, _EVAL_BLOCK // (n * n))
    for start in range(0, len(points), block):
        p = points[start:start + block]
        ex, ey, ez = (np.exp(2j * np.pi * np.outer(p[:, e], f)) for e, f in ((0, k), (1, k), (2, kz)))
        partial = (flat @ ez.T).reshape(n, n, len(p))
        partial = np.einsum("abp,pb->ap", partial, ey)
        out[start:start + block] = np.einsum("ap,pa->p", partial, ex).real
    return out / n ** 3


@dataclass(frozen=True)
class SpectralSolution:
    u: GridField
    source_mean: float  # mean of f removed before inversion

    @cached_property
    def spectrum(self) -> np.ndarray:
        """rfft-layout spectrum of u, computed on first use."""
        return scipy.fft.rfftn(self.u.data)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return trig_interpolate(self.spectrum, points, half=True)


class SpectralPoissonSolver:
    """Precomputes the inverse Laplace symbol for one grid size (the FFT Setup phase)."""

    def __init__(self, n: int, workers: int = 1):
        if n < 2:
            raise InvalidArgumentError(f"grid needs n >= 2, got {n}")
        self.n = n
        self.workers = max(int(workers), 1)
        k = signed_frequencies(n)
        kr = np.abs(k[: n // 2 + 1])  # rfft layout along the last axis
        k2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + kr[None, None, :] ** 2
        symbol = np.zeros(k2.shape)
        nonzero = k2 > 0
        symbol[nonzero] = 1.0 / (4.0 * np.pi ** 2 * k2[nonzero])
        self.symbol = symbol

    def solve(self, f: GridField) -> SpectralSolution:
        """u_hat = f_hat / (4 pi^2 |k|^2), u_hat[0] = 0."""
        if f.n != self.n:
            raise InvalidArgumentError(f"solver built for n={self.n}, got field with n={f.n}")
        f_hat = scipy.fft.rfftn(f.data, workers=self.workers)
        source_mean = float(f_hat[0, 0, 0].real) / f.size
        u = scipy.fft.irfftn(f_hat * self.symbol, s=f.data.shape, workers=self.workers)
        if abs(source_mean) > 0:
            logger.debug("removed source mean %.3e", source_mean)
        return SpectralSolution(GridField(self.n, u), source_mean)


def poisson_spectral_solve(f: GridField, workers: int = 1) -> SpectralSolution:
    return SpectralPoissonSolver(f.n, workers).solve(f)


def spectral_laplacian(u: GridField) -> GridField:
    """-Delta u applied spectrally (residual checks)."""
    k = signed_frequencies(u.n)
    k2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2
    return dft3_inverse(4.0 * np.pi ** 2 * k2 * dft3_forward(u))
