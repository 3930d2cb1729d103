"""Minimal-N search along a monotone growth schedule."""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import TYPE_CHECKING

from ..shared.errors import InvalidArgumentError
from ..shared.types import RunConfig, RunStatus, SolverId, SweepResult

if TYPE_CHECKING:
    from ..arena import Arena

logger = logging.getLogger(__name__)


def grow(cfg: RunConfig, step: int) -> RunConfig:
    """The schedule point `step` doublings (FFT, GMG) or levels (FMM) beyond `cfg`."""
    if step < 0:
        raise InvalidArgumentError(f"schedule step must be >= 0, got {step}")
    if cfg.solver == SolverId.FFT:
        return dataclasses.replace(cfg, n=cfg.n << step)
    if cfg.solver == SolverId.GMG:
        return dataclasses.replace(cfg, e=cfg.e << step)
    return dataclasses.replace(cfg, depth=cfg.depth + step)


def schedule(cfg: RunConfig, steps: int) -> list[RunConfig]:
    if steps < 1:
        raise InvalidArgumentError(f"a sweep needs at least one step, got {steps}")
    return [grow(cfg, k) for k in range(steps)]


def find_min_N(cfg: RunConfig, target: float, steps: int, arena: "Arena") -> SweepResult:
    """Run the schedule until the error meets `target`.

    Returns the first report meeting it, or the best report (status
    not_achieved) when the schedule is exhausted.
    """
    if not target > 0:
        raise InvalidArgumentError(f"target must be positive, got {target}")
    arena.event_bus.status_update(f"{cfg.solver.value} sweep on {cfg.case}: up to {steps} points, target {target:.1e}")
    sweep = []
    for index, point in enumerate(schedule(dataclasses.replace(cfg, target=target), steps)):
        report = arena.run(point)
        sweep.append(report)
        arena.event_bus.sweep_point(report.run_id, index, report.linf_rel_error, target)
        if report.status != RunStatus.FAILED and report.linf_rel_error <= target:
            report.status = RunStatus.OK
            return SweepResult(report, True, sweep)

    measured = [r for r in sweep if r.status != RunStatus.FAILED and math.isfinite(r.linf_rel_error)]
    if not measured:
        logger.warning("every point of the %s sweep failed", cfg.solver.value)
        return SweepResult(sweep[-1], False, sweep)
    best = dataclasses.replace(min(measured, key=lambda r: r.linf_rel_error), status=RunStatus.NOT_ACHIEVED)
    best.message = f"target {target:.1e} not reached after {len(sweep)} points"
    return SweepResult(best, False, sweep)
