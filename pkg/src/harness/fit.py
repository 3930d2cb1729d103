"""Least-squares constants of the per-solver cost models."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ..shared.errors import InvalidArgumentError
from ..shared.types import RunStatus, SolveReport, SolverId

logger = logging.getLogger(__name__)

MIN_REPORTS = 3
MIN_SPREAD = 4.0


@dataclass
class FitResult:
    solver: SolverId
    model: str
    constant: float
    sigma: float  # standard deviation of the per-run constants T / g(N)
    max_residual: float  # max |T - c g| / T over the fitted runs
    count: int


def model_size(report: SolveReport, fmm_model: str = "N") -> tuple[str, float]:
    """The model term g so that time ~ c * g."""
    n = float(report.n_unknowns)
    if report.solver == SolverId.FFT:
        return "N log2 N", n * np.log2(n)
    if report.solver == SolverId.FMM and fmm_model == "u":
        q = report.params.get("q", 0)
        return "q^6 N_U", float(q) ** 6 * float(report.counters.get("N_U", 0))
    return "N", n


def fit_constants(reports: list[SolveReport], column: str = "solve_seconds",
                  fmm_model: str = "N") -> dict[SolverId, FitResult]:
    """Fit `column` (a report time or an FMM counter such as seconds_u) per solver.

    Each solver needs at least three successful reports spanning a 4x range of N.
    """
    groups: dict[SolverId, list[SolveReport]] = defaultdict(list)
    for r in reports:
        if r.status != RunStatus.FAILED:
            groups[r.solver].append(r)
    if not groups:
        raise InvalidArgumentError("no successful reports to fit")

    out = {}
    for solver, rs in sorted(groups.items(), key=lambda item: item[0].value):
        sizes = [r.n_unknowns for r in rs]
        if len(rs) < MIN_REPORTS or max(sizes) < MIN_SPREAD * min(sizes):
            raise InvalidArgumentError(
                f"{solver.value}: need >= {MIN_REPORTS} reports spanning {MIN_SPREAD:g}x in N, "
                f"got {len(rs)} with N in [{min(sizes)}, {max(sizes)}]")
        terms = [model_size(r, fmm_model) for r in rs]
        g = np.array([t[1] for t in terms])
        t = np.array([_value(r, column) for r in rs])
        if np.any(g <= 0):
            raise InvalidArgumentError(f"{solver.value}: model term vanishes for some report")
        c = float(np.dot(g, t) / np.dot(g, g))
        ratios = t / g
        sigma = float(np.std(ratios, ddof=1))
        residual = float(np.max(np.abs(t - c * g) / np.where(t > 0, t, 1.0)))
        out[solver] = FitResult(solver, terms[0][0], c, sigma, residual, len(rs))
        logger.info("%s: %s = %.4e * %s (sigma %.2e, max residual %.1f%%)",
                    solver.value, column, c, terms[0][0], sigma, 100 * residual)
    return out


def _value(report: SolveReport, column: str) -> float:
    if column in ("solve_seconds", "setup_seconds"):
        return float(getattr(report, column))
    if column == "total_seconds":
        return report.setup_seconds + report.solve_seconds
    if column in report.counters:
        return float(report.counters[column])
    raise InvalidArgumentError(f"report {report.run_id} has no column {column!r}")
