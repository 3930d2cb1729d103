"""Damped Jacobi smoothing, the V-cycle, and V-cycle preconditioned CG."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..shared.errors import ConvergenceError, InvalidArgumentError
from .hierarchy import MGHierarchy
from .mesh import MeshLevel
from .transfer import prolong, restrict

logger = logging.getLogger(__name__)

OMEGA = 2.0 / 3.0


@dataclass(frozen=True)
class CycleParams:
    nu_pre: int = 2
    nu_post: int = 1
    omega: float = OMEGA


@dataclass
class PcgResult:
    u: np.ndarray
    iterations: int
    history: list[float] = field(default_factory=list)  # relative residual after each iteration
    rhs_mean: float = 0.0  # nodal mean removed from the right-hand side


def jacobi_smooth(level: MeshLevel, diag: np.ndarray, u: np.ndarray, f: np.ndarray, steps: int,
                  omega: float = OMEGA) -> np.ndarray:
    if steps < 0:
        raise InvalidArgumentError(f"steps must be >= 0, got {steps}")
    u = level.check(u).copy()
    for _ in range(steps):
        u += omega * (f - level.apply_operator(u)) / diag
    return u


def vcycle(hierarchy: MGHierarchy, f: np.ndarray, u0: np.ndarray | None = None,
           params: CycleParams = CycleParams()) -> np.ndarray:
    """One V(nu_pre, nu_post) cycle on the finest level."""
    fine = hierarchy.finest
    u = np.zeros(fine.shape) if u0 is None else fine.check(u0)
    return _cycle(hierarchy, hierarchy.depth, fine.check(f), u, params)


def _cycle(h: MGHierarchy, k: int, f: np.ndarray, u: np.ndarray, params: CycleParams) -> np.ndarray:
    if k == 0:
        return h.coarse_solve(f)
    level, coarse = h.levels[k], h.levels[k - 1]
    u = jacobi_smooth(level, h.diagonals[k], u, f, params.nu_pre, params.omega)
    r = f - level.apply_operator(u)
    correction = _cycle(h, k - 1, restrict(level, coarse, r), np.zeros(coarse.shape), params)
    u = u + prolong(coarse, level, correction)
    return jacobi_smooth(level, h.diagonals[k], u, f, params.nu_post, params.omega)


def pcg_solve(hierarchy: MGHierarchy, f: np.ndarray, rel_tol: float = 1e-13, max_iter: int = 200,
              params: CycleParams = CycleParams()) -> PcgResult:
    """Flexible (Polak-Ribiere) CG preconditioned by one V-cycle per iteration.

    `f` is the assembled right-hand side on the finest level; its nodal mean is
    removed first. Stops when ||f - A u|| / ||f|| <= rel_tol.
    """
    if not 0.0 < rel_tol < 1.0:
        raise InvalidArgumentError(f"rel_tol must be in (0, 1), got {rel_tol}")
    level = hierarchy.finest
    b = level.check(f)
    rhs_mean = float(b.mean())
    b = b - rhs_mean
    norm_b = float(np.linalg.norm(b))
    u = np.zeros(level.shape)
    if norm_b == 0.0:
        return PcgResult(u, 0, [], rhs_mean)

    r = b.copy()
    z = vcycle(hierarchy, r, params=params)
    p = z.copy()
    rz = float(np.vdot(r, z))
    history: list[float] = []
    for it in range(1, max_iter + 1):
        ap = level.apply_operator(p)
        alpha = rz / float(np.vdot(p, ap))
        u += alpha * p
        r_new = r - alpha * ap
        history.append(float(np.linalg.norm(r_new)) / norm_b)
        if history[-1] <= rel_tol:
            logger.debug("pcg converged in %d iterations", it)
            return PcgResult(u - u.mean(), it, history, rhs_mean)
        z_new = vcycle(hierarchy, r_new, params=params)
        rz_new = float(np.vdot(r_new, z_new))
        if rz_new <= 0.0:
            logger.warning("non-positive preconditioned residual at iteration %d, restarting", it)
            z_new = r_new.copy()
            rz_new = float(np.vdot(r_new, r_new))
            p = z_new.copy()
        else:
            beta = max(float(np.vdot(z_new, r_new - r)) / rz, 0.0)
            p = z_new + beta * p
        r, rz = r_new, rz_new

    raise ConvergenceError(f"pcg did not reach {rel_tol:.1e} in {max_iter} iterations", history)


def assemble_rhs(level: MeshLevel, f_nodes: np.ndarray) -> tuple[np.ndarray, float]:
    """Load vector M (f - c) with c the mass-weighted mean of the interpolated source.

    Returns the vector and c.
    """
    f_nodes = level.check(f_nodes)
    weights = level.mass_weights()
    c = float(np.sum(weights * f_nodes) / np.sum(weights))
    return level.apply_mass(f_nodes - c), c


def history_csv(history: list[float]) -> str:
    """'iteration,relative_residual' lines, one per PCG iteration."""
    lines = ["iteration,relative_residual"]
    lines += [f"{i},{r:.6e}" for i, r in enumerate(history, start=1)]
    return "\n".join(lines) + "\n"
