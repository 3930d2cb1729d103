"""Timed single runs: Setup, Solve, error measurement, report."""

from __future__ import annotations

import logging
import math
import time
from typing import TYPE_CHECKING

import numpy as np

from ..gmg.cycle import history_csv
from ..problems.cases import measure_error, parse_case
from ..shared.errors import ArenaError, ConvergenceError
from ..shared.types import RunConfig, RunStatus, SolveReport

if TYPE_CHECKING:
    from ..arena import Arena

logger = logging.getLogger(__name__)

REPEAT_BELOW_SECONDS = 1.0
REPEATS = 3


def _failed(cfg: RunConfig, message: str, **extra) -> SolveReport:
    return SolveReport(cfg.run_id, cfg.solver, cfg.case, cfg.echo(), RunStatus.FAILED, cfg.threads,
                       message=message, **extra)


def run_single(cfg: RunConfig, arena: "Arena") -> SolveReport:
    """Set up, solve (best of three when quick) and measure one configuration.

    Solver errors never escape: they become a failed report.
    """
    bus = arena.event_bus
    run_id = cfg.run_id
    bus.run_started(run_id, cfg.solver.value, cfg.echo())
    try:
        tc = parse_case(cfg.case)
        adapter = arena.adapter(cfg.solver)

        start = time.perf_counter()
        state = adapter.setup(cfg, tc)
        setup_seconds = time.perf_counter() - start
        bus.phase_done(run_id, "setup", setup_seconds)

        start = time.perf_counter()
        outcome = adapter.solve(state)
        solve_seconds = time.perf_counter() - start
        if setup_seconds + solve_seconds < REPEAT_BELOW_SECONDS:
            for _ in range(REPEATS - 1):
                start = time.perf_counter()
                outcome = adapter.solve(state)
                solve_seconds = min(solve_seconds, time.perf_counter() - start)
        bus.phase_done(run_id, "solve", solve_seconds)

        samples = arena.samples(cfg.seed)
        points = np.concatenate([outcome.native_points, samples])
        values = np.concatenate([outcome.native_values, outcome.evaluate(samples)])
        error = measure_error(values, tc, points)
    except ConvergenceError as e:
        logger.warning("%s: %s", run_id, e)
        bus.run_failed(run_id, str(e))
        return _failed(cfg, str(e), iterations=len(e.history),
                       artifacts={"history": history_csv(e.history)})
    except ArenaError as e:
        bus.run_failed(run_id, str(e))
        return _failed(cfg, str(e))
    except Exception as e:
        logger.exception("%s crashed", run_id)
        bus.run_failed(run_id, f"{type(e).__name__}: {e}")
        return _failed(cfg, f"{type(e).__name__}: {e}")

    for w in outcome.warnings:
        bus.warning(run_id, w)
    status = RunStatus.OK
    if math.isfinite(cfg.target) and not error.linf_rel <= cfg.target:
        status = RunStatus.NOT_ACHIEVED
    report = SolveReport(
        run_id=run_id,
        solver=cfg.solver,
        case=tc.label,
        params=cfg.echo(),
        status=status,
        threads=cfg.threads,
        n_unknowns=outcome.n_unknowns,
        level=outcome.level,
        setup_seconds=setup_seconds,
        solve_seconds=solve_seconds,
        iterations=outcome.iterations,
        counters=outcome.counters,
        linf_rel_error=error.linf_rel,
        warnings=list(outcome.warnings),
        artifacts=dict(outcome.artifacts),
    )
    bus.run_done(run_id, error.linf_rel, outcome.n_unknowns)
    return report
