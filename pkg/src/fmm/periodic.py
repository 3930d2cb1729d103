"""Far-field closure for periodic evaluation.

The interaction lists already wrap across faces, so the tree accounts for every
source image inside the 3x3x3 block of unit cells around the root. What remains
is the field of all farther images, a smooth correction applied once at the
root: root downward check += Far @ root upward density, with

    Far(r) = K_per(r) - sum_{|t|_inf <= 1} K(r - t)

and K_per = -G_per the zero-mean periodic kernel obtained by Ewald splitting.
Using the zero-mean Green's function avoids the conditionally convergent dipole
term of plain image truncation; the neutral background drops out because the
periodic source has zero total charge.
"""

from __future__ import annotations

import logging
from itertools import product

import numpy as np
from scipy.special import erf, erfc

from .kernel import FOUR_PI

logger = logging.getLogger(__name__)

_TARGET_DIGITS = 36.0  # erfc and Gaussian tails below exp(-36)


def ewald_parameters(image_layers: int) -> tuple[float, int]:
    """Splitting parameter beta and reciprocal cutoff for `image_layers` real-space layers.

    Differences between root surface points stay within one cell, so the
    nearest excluded real-space image is at distance >= image_layers - 0.1.
    """
    layers = max(int(image_layers), 1)
    beta = np.sqrt(_TARGET_DIGITS) / max(layers - 0.1, 0.9)
    k_max = int(np.ceil(2.0 * beta * np.sqrt(_TARGET_DIGITS) / (2.0 * np.pi)))
    return float(beta), k_max


def _reciprocal_sum(r: np.ndarray, beta: float, k_max: int, chunk: int = 1024) -> np.ndarray:
    ints = np.array([k for k in product(range(-k_max, k_max + 1), repeat=3) if any(k)], dtype=float)
    kvec = 2.0 * np.pi * ints
    k2 = np.sum(kvec ** 2, axis=1)
    weights = np.exp(-k2 / (4.0 * beta ** 2)) / k2
    keep = weights > 1e-300
    kvec, weights = kvec[keep], weights[keep]
    out = np.empty(len(r))
    for start in range(0, len(r), chunk):
        out[start:start + chunk] = np.cos(r[start:start + chunk] @ kvec.T) @ weights
    return out


def _erf_over_4pi_r(d: np.ndarray, beta: float) -> np.ndarray:
    """erf(beta d) / (4 pi d) with its finite limit at d = 0."""
    safe = np.where(d > 0, d, 1.0)
    return np.where(d > 0, erf(beta * safe) / (FOUR_PI * safe), beta / (2.0 * np.pi ** 1.5))


def periodic_green(r: np.ndarray, image_layers: int = 2) -> np.ndarray:
    """Zero-mean periodic Green's function of -Delta on the unit cell, at (N, 3) offsets off the lattice."""
    r = np.atleast_2d(np.asarray(r, dtype=float))
    beta, k_max = ewald_parameters(image_layers)
    real = np.zeros(len(r))
    for n in product(range(-image_layers, image_layers + 1), repeat=3):
        d = np.linalg.norm(r + np.asarray(n, dtype=float), axis=1)
        real += erfc(beta * d) / (FOUR_PI * d)
    return real + _reciprocal_sum(r, beta, k_max) - 1.0 / (4.0 * beta ** 2)


def far_kernel(r: np.ndarray, image_layers: int = 2) -> np.ndarray:
    """K_per minus the 27 nearest images of K, at (N, 3) offsets.

    Near images are combined with their Ewald real-space terms so the result is
    regular at lattice points.
    """
    r = np.atleast_2d(np.asarray(r, dtype=float))
    beta, k_max = ewald_parameters(image_layers)
    out = np.zeros(len(r))
    for n in product(range(-image_layers, image_layers + 1), repeat=3):
        d = np.linalg.norm(r + np.asarray(n, dtype=float), axis=1)
        if max(abs(c) for c in n) <= 1:
            out += _erf_over_4pi_r(d, beta)
        else:
            out -= erfc(beta * d) / (FOUR_PI * d)
    return out - _reciprocal_sum(r, beta, k_max) + 1.0 / (4.0 * beta ** 2)


def far_operator(check_points: np.ndarray, equiv_points: np.ndarray, image_layers: int = 2) -> np.ndarray:
    """Dense (n_check, n_equiv) far-image operator for the root cell.

    Offsets repeat heavily when both surfaces share a lattice, so the kernel is
    evaluated once per distinct offset.
    """
    diffs = (check_points[:, None, :] - equiv_points[None, :, :]).reshape(-1, 3)
    unique, inverse = np.unique(np.round(diffs, 12), axis=0, return_inverse=True)
    logger.debug("far operator: %d distinct offsets of %d pairs", len(unique), len(diffs))
    values = far_kernel(unique, image_layers)
    return values[np.ravel(inverse)].reshape(len(check_points), len(equiv_points))
