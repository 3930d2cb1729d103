"""Uniform setup/solve interface over the three solvers.

`setup` does everything attributed to the Setup phase and returns opaque state;
`solve` samples the source, runs the solver and returns a `SolveOutcome` whose
`evaluate` gives the periodic, mean-free solution of -Delta u = f.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

from ..chebyshev.approx import cheb_approx, octant_nodes
from ..fft.grid import GridField, grid_points
from ..fmm.evaluator import FmmParams
from ..gmg.cycle import CycleParams, assemble_rhs, history_csv, pcg_solve
from ..gmg.hierarchy import default_levels
from ..octree.lists import build_interaction_lists
from ..octree.tree import balance_2to1, dump_tree, refine_adaptive
from ..problems.cases import TestCase, source_function
from ..shared.errors import InvalidArgumentError
from ..shared.types import RunConfig, SolverId

if TYPE_CHECKING:
    from ..arena import Arena

logger = logging.getLogger(__name__)


@dataclass
class SolveOutcome:
    evaluate: Callable[[np.ndarray], np.ndarray]
    native_points: np.ndarray  # points where `native_values` are the solver's own unknowns
    native_values: np.ndarray
    n_unknowns: int
    level: int
    iterations: int | None = None
    counters: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)  # "tree" or "history" text


class SolverAdapter(ABC):
    solver: SolverId

    def __init__(self, arena: "Arena"):
        self.arena = arena

    @abstractmethod
    def setup(self, cfg: RunConfig, tc: TestCase) -> Any: ...

    @abstractmethod
    def solve(self, state: Any) -> SolveOutcome: ...


# --- FFT ---

@dataclass
class _FftState:
    cfg: RunConfig
    tc: TestCase
    solver: Any


class FftAdapter(SolverAdapter):
    solver = SolverId.FFT

    def setup(self, cfg: RunConfig, tc: TestCase) -> _FftState:
        if cfg.n < 2:
            raise InvalidArgumentError(f"fft needs n >= 2, got {cfg.n}")
        return _FftState(cfg, tc, self.arena.spectral_solver(cfg.n, cfg.threads))

    def solve(self, state: _FftState) -> SolveOutcome:
        n = state.cfg.n
        f = GridField.from_function(source_function(state.tc), n)
        solution = state.solver.solve(f)
        warnings = []
        if abs(solution.source_mean) > 1e-8:
            warnings.append(f"removed source mean {solution.source_mean:.3e}")
        return SolveOutcome(
            evaluate=solution.evaluate,
            native_points=grid_points(n),
            native_values=solution.u.data.ravel(),
            n_unknowns=n ** 3,
            level=int(np.log2(n)),
            warnings=warnings,
        )


# --- FMM ---

@dataclass
class _FmmState:
    cfg: RunConfig
    tree: Any
    lists: Any
    evaluator: Any


class FmmAdapter(SolverAdapter):
    """Periodic volume FMM; setup covers tree build, 2:1 balance, tables and lists."""
    solver = SolverId.FMM

    def params(self, cfg: RunConfig) -> FmmParams:
        s = self.arena.settings
        return FmmParams(
            q=cfg.order(), m=cfg.m, periodic=cfg.periodic, fft_m2l=s.fft_m2l,
            image_layers=s.image_layers, up_equiv=s.up_equiv_ratio, up_check=s.up_check_ratio,
            down_check=s.up_equiv_ratio, down_equiv=s.up_check_ratio, pinv_cutoff=s.pinv_cutoff,
            threads=cfg.threads,
        )

    def setup(self, cfg: RunConfig, tc: TestCase) -> _FmmState:
        q = cfg.order()
        f = source_function(tc)
        tree = refine_adaptive(f, q, cfg.tol, cfg.depth, self.arena.settings.tol_mode,
                               min_depth=min(cfg.min_depth, cfg.depth))
        tree = balance_2to1(tree, cfg.periodic, reapproximate=lambda key: cheb_approx(f, key, q))
        evaluator = self.arena.fmm_evaluator(self.params(cfg))
        evaluator.setup()
        lists = build_interaction_lists(tree, cfg.periodic)
        logger.info("fmm tree: %d leaves, depth %d", len(tree.leaves), tree.depth)
        return _FmmState(cfg, tree, lists, evaluator)

    def solve(self, state: _FmmState) -> SolveOutcome:
        result = state.evaluator.evaluate(state.tree, state.lists)
        q = state.cfg.order()
        leaves = list(state.tree.leaves)
        # The FMM sums K * f with K = -1/(4 pi r); the Poisson solution is its negation.
        points = np.concatenate([octant_nodes(leaf, q) for leaf in leaves])
        values = -np.concatenate([result.node_potentials[leaf] for leaf in leaves])
        counters = dict(result.counters)
        counters.update({f"seconds_{k}": v for k, v in result.timings.items()})
        return SolveOutcome(
            evaluate=lambda pts: -result.evaluate(pts),
            native_points=points,
            native_values=values,
            n_unknowns=len(leaves) * q ** 3,
            level=state.tree.depth,
            counters=counters,
            warnings=list(state.tree.warnings),
            artifacts={"tree": dump_tree(state.tree)},
        )


# --- GMG ---

@dataclass
class _GmgState:
    cfg: RunConfig
    tc: TestCase
    hierarchy: Any


class GmgAdapter(SolverAdapter):
    solver = SolverId.GMG

    def setup(self, cfg: RunConfig, tc: TestCase) -> _GmgState:
        q = cfg.order()
        max_coarse = self.arena.settings.max_coarse
        levels = cfg.levels if cfg.levels is not None else default_levels(cfg.e, q, max_coarse)
        return _GmgState(cfg, tc, self.arena.hierarchy(cfg.e, q, levels))

    def solve(self, state: _GmgState) -> SolveOutcome:
        cfg = state.cfg
        fine = state.hierarchy.finest
        f_nodes = fine.interpolate(source_function(state.tc))
        rhs, source_mean = assemble_rhs(fine, f_nodes)
        params = CycleParams(cfg.nu_pre, cfg.nu_post, cfg.omega)
        result = pcg_solve(state.hierarchy, rhs, cfg.rel_tol, cfg.max_iter, params)
        warnings = []
        if abs(source_mean) > 1e-8:
            warnings.append(f"removed source mean {source_mean:.3e}")
        u = result.u
        return SolveOutcome(
            evaluate=lambda pts: fine.evaluate(u, pts),
            native_points=fine.nodes(),
            native_values=u.ravel(),
            n_unknowns=fine.size,
            level=int(np.log2(fine.e)),
            iterations=result.iterations,
            counters={"final_residual": result.history[-1] if result.history else 0.0},
            warnings=warnings,
            artifacts={"history": history_csv(result.history)},
        )


ADAPTERS: dict[SolverId, type[SolverAdapter]] = {
    SolverId.FFT: FftAdapter,
    SolverId.FMM: FmmAdapter,
    SolverId.GMG: GmgAdapter,
}
