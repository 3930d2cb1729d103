"""Arena coordinator - owns the shared resources of a benchmarking session."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from .harness.config import ArenaSettings
from .shared.events import EventBus
from .shared.types import RunConfig, SolveReport, SolverId, SweepResult

if TYPE_CHECKING:
    from .fft.solver import SpectralPoissonSolver
    from .fmm.evaluator import FmmEvaluator, FmmParams
    from .gmg.hierarchy import MGHierarchy
    from .harness.adapters import SolverAdapter

logger = logging.getLogger(__name__)


class Arena:
    """Central coordinator for benchmark runs.

    Owns all shared resources:
    - event_bus: progress events for every run
    - settings: ARENA_* environment settings
    - precomputation caches (spectral symbols, FMM operators and near tables,
      multigrid hierarchies, sample sets), reused across runs of a sweep

    Solver adapters are created lazily and reach these through the arena.
    """

    def __init__(self, settings: ArenaSettings | None = None, event_bus: EventBus | None = None):
        self.settings = settings or ArenaSettings.from_env()
        self.event_bus = event_bus or EventBus()

        self._adapters: dict[SolverId, "SolverAdapter"] = {}
        self._spectral: dict[tuple[int, int], "SpectralPoissonSolver"] = {}
        self._evaluators: dict["FmmParams", "FmmEvaluator"] = {}
        self._hierarchies: dict[tuple[int, int, int], "MGHierarchy"] = {}
        self._samples: dict[tuple[int, int], np.ndarray] = {}

    def adapter(self, solver: SolverId) -> "SolverAdapter":
        """Get or create the adapter for one solver."""
        if solver not in self._adapters:
            from .harness.adapters import ADAPTERS
            self._adapters[solver] = ADAPTERS[solver](self)
        return self._adapters[solver]

    # --- caches ---

    def spectral_solver(self, n: int, threads: int) -> "SpectralPoissonSolver":
        key = (n, threads)
        if key not in self._spectral:
            from .fft.solver import SpectralPoissonSolver
            self._spectral[key] = SpectralPoissonSolver(n, threads)
        return self._spectral[key]

    def fmm_evaluator(self, params: "FmmParams") -> "FmmEvaluator":
        if params not in self._evaluators:
            from .fmm.evaluator import FmmEvaluator
            self._evaluators[params] = FmmEvaluator(params, cache_dir=self.settings.cache_dir)
        return self._evaluators[params]

    def hierarchy(self, e: int, q: int, levels: int) -> "MGHierarchy":
        key = (e, q, levels)
        if key not in self._hierarchies:
            from .gmg.hierarchy import assemble_hierarchy
            self._hierarchies[key] = assemble_hierarchy(e, q, levels, self.settings.max_coarse)
        return self._hierarchies[key]

    def samples(self, seed: int) -> np.ndarray:
        key = (self.settings.sample_count, seed)
        if key not in self._samples:
            from .problems.cases import halton_samples
            self._samples[key] = halton_samples(*key)
        return self._samples[key]

    def clear_caches(self) -> None:
        self._spectral.clear()
        self._evaluators.clear()
        self._hierarchies.clear()

    # --- runs ---

    def run(self, cfg: RunConfig) -> SolveReport:
        from .harness.runner import run_single
        return run_single(cfg, self)

    def sweep(self, cfg: RunConfig, target: float | None = None, steps: int = 5) -> SweepResult:
        from .harness.sweep import find_min_N
        return find_min_N(cfg, cfg.target if target is None else target, steps, self)
