"""Core types shared by the solvers and the benchmark harness."""

import json
import math
from dataclasses import dataclass, field
from enum import Enum


class SolverId(Enum):
    FFT = "fft"
    FMM = "fmm"
    GMG = "gmg"


class RunStatus(Enum):
    OK = "ok"
    NOT_ACHIEVED = "not_achieved"
    FAILED = "failed"


class ToleranceMode(Enum):
    """How the adaptive refinement tolerance is interpreted."""
    RELATIVE = "relative"  # scaled by max |f| sampled on the root octant
    ABSOLUTE = "absolute"


# Column order of one report row. Timing columns are volatile across runs.
REPORT_COLUMNS = [
    "run_id", "solver", "case", "status", "threads", "n_unknowns", "level",
    "setup_seconds", "solve_seconds", "iterations", "linf_rel_error",
    "params", "counters", "warnings", "message",
]
VOLATILE_COLUMNS = ("setup_seconds", "solve_seconds")


@dataclass
class SolveReport:
    """Record of one benchmark run."""
    run_id: str
    solver: SolverId
    case: str  # e.g. "osc:k=4" or "layer:alpha=10,R=0.25"
    params: dict = field(default_factory=dict)
    status: RunStatus = RunStatus.OK
    threads: int = 1

    n_unknowns: int = 0
    level: int = 0  # refinement level L (tree depth, log2 n, or log2 e)
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0
    iterations: int | None = None  # GMG only
    counters: dict = field(default_factory=dict)  # FMM interaction counters
    linf_rel_error: float = math.nan

    warnings: list[str] = field(default_factory=list)
    message: str = ""
    artifacts: dict[str, str] = field(default_factory=dict, compare=False, repr=False)  # text dumps, not in CSV

    @property
    def ok(self) -> bool:
        return self.status == RunStatus.OK

    def to_row(self) -> dict[str, str]:
        """Serialize as one CSV row (stable key order for reproducible output)."""
        return {
            "run_id": self.run_id,
            "solver": self.solver.value,
            "case": self.case,
            "status": self.status.value,
            "threads": str(self.threads),
            "n_unknowns": str(self.n_unknowns),
            "level": str(self.level),
            "setup_seconds": f"{self.setup_seconds:.6e}",
            "solve_seconds": f"{self.solve_seconds:.6e}",
            "iterations": "" if self.iterations is None else str(self.iterations),
            "linf_rel_error": f"{self.linf_rel_error:.6e}",
            "params": json.dumps(self.params, sort_keys=True),
            "counters": json.dumps(self.counters, sort_keys=True),
            "warnings": "; ".join(self.warnings),
            "message": self.message,
        }

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "SolveReport":
        return cls(
            run_id=row["run_id"],
            solver=SolverId(row["solver"]),
            case=row["case"],
            params=json.loads(row.get("params") or "{}"),
            status=RunStatus(row["status"]),
            threads=int(row.get("threads") or 1),
            n_unknowns=int(row["n_unknowns"]),
            level=int(row.get("level") or 0),
            setup_seconds=float(row["setup_seconds"]),
            solve_seconds=float(row["solve_seconds"]),
            iterations=int(row["iterations"]) if row.get("iterations") else None,
            counters=json.loads(row.get("counters") or "{}"),
            linf_rel_error=float(row["linf_rel_error"]),
            warnings=[w for w in (row.get("warnings") or "").split("; ") if w],
            message=row.get("message", ""),
        )


@dataclass
class SweepResult:
    """Outcome of a minimal-N search."""
    report: SolveReport  # first report meeting the target, or the best one
    achieved: bool
    sweep: list[SolveReport] = field(default_factory=list)


@dataclass
class RunConfig:
    """One benchmark run. Size parameters not used by `solver` are ignored."""
    solver: SolverId = SolverId.FFT
    case: str = "osc:k=1"
    target: float = math.inf  # accuracy target for sweeps and the exit code
    threads: int = 1
    seed: int = 0

    # FFT
    n: int = 16  # grid points per axis

    # FMM
    q: int | None = None  # Chebyshev order (FMM) or element order (GMG)
    m: int = 4  # surface points per edge
    depth: int = 4  # maximum tree depth
    min_depth: int = 2
    tol: float = 1e-6  # refinement tolerance
    periodic: bool = True

    # GMG
    e: int = 8  # elements per axis
    levels: int | None = None  # coarsening steps; None picks the default hierarchy
    nu_pre: int = 2
    nu_post: int = 1
    omega: float = 2.0 / 3.0
    rel_tol: float = 1e-13
    max_iter: int = 200

    def order(self) -> int:
        if self.q is not None:
            return self.q
        return 6 if self.solver == SolverId.FMM else 1

    def size_label(self) -> str:
        if self.solver == SolverId.FFT:
            return f"n{self.n}"
        if self.solver == SolverId.FMM:
            return f"q{self.order()}m{self.m}d{self.depth}t{self.tol:g}"
        return f"q{self.order()}e{self.e}"

    @property
    def run_id(self) -> str:
        """Deterministic id, so reports are reproducible row for row."""
        return f"{self.solver.value}-{self.case}-{self.size_label()}"

    def echo(self) -> dict:
        """Parameters that matter for this solver, as stored in the report."""
        out: dict = {"threads": self.threads, "seed": self.seed}
        if self.solver == SolverId.FFT:
            out.update(n=self.n)
        elif self.solver == SolverId.FMM:
            out.update(q=self.order(), m=self.m, depth=self.depth, min_depth=self.min_depth,
                       tol=self.tol, periodic=self.periodic)
        else:
            out.update(q=self.order(), e=self.e, levels=self.levels, nu_pre=self.nu_pre,
                       nu_post=self.nu_post, omega=self.omega, rel_tol=self.rel_tol, max_iter=self.max_iter)
        return out
