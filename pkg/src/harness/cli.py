"""Command line: arena run | sweep | table | fit."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from ..shared.errors import ArenaError
from ..shared.events import console_event_handler
from ..shared.types import RunConfig, RunStatus, SolveReport
from .config import ArenaSettings, PRESETS, config_from_mapping, load_run_file, with_settings
from .fit import fit_constants
from .report import read_reports, write_reports, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_ACHIEVED = 2

# CLI flags that map onto RunConfig fields
_RUN_FLAGS = [
    ("--solver", str, "fft, fmm or gmg"),
    ("--case", str, "osc:k=8 or layer:alpha=10[,R=0.25]"),
    ("--target", str, "accuracy target (relative linf)"),
    ("--q", str, "Chebyshev (fmm) or element (gmg) order"),
    ("--m", int, "FMM surface points per edge"),
    ("--n", int, "FFT grid points per axis"),
    ("--e", int, "GMG elements per axis"),
    ("--levels", str, "GMG coarsening steps"),
    ("--depth", int, "FMM maximum tree depth"),
    ("--min-depth", int, "FMM minimum tree depth"),
    ("--tol", float, "FMM refinement tolerance"),
    ("--threads", int, "solver threads"),
    ("--seed", int, "sample-set seed"),
    ("--nu-pre", int, "GMG pre-smoothing steps"),
    ("--nu-post", int, "GMG post-smoothing steps"),
    ("--omega", float, "Jacobi damping"),
    ("--rel-tol", float, "GMG relative residual tolerance"),
    ("--max-iter", int, "GMG iteration cap"),
    ("--periodic", str, "FMM periodic images (true/false)"),
]


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value run file; flags override it")
    parser.add_argument("--preset", choices=sorted(PRESETS))
    for flag, kind, text in _RUN_FLAGS:
        parser.add_argument(flag, type=kind, help=text)
    parser.add_argument("--out", help="CSV report path")
    parser.add_argument("--dump-tree", metavar="PATH", help="write the final FMM leaf list (level x y z per line)")
    parser.add_argument("--history", metavar="PATH", help="write the final GMG residual history as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arena", description="Poisson solver benchmark arena")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one timed solve")
    _add_run_flags(run)

    sweep = sub.add_parser("sweep", help="smallest size meeting --target")
    _add_run_flags(sweep)
    sweep.add_argument("--steps", type=int, default=5, help="schedule length")

    table = sub.add_parser("table", help="comparison table and gnuplot script from CSV reports")
    table.add_argument("reports", nargs="+")
    table.add_argument("--out", default="table", help="output stem (.dat and .gp)")

    fit = sub.add_parser("fit", help="cost-model constants from CSV reports")
    fit.add_argument("reports", nargs="+")
    fit.add_argument("--column", default="solve_seconds")
    fit.add_argument("--fmm-model", choices=("N", "u"), default="N")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_file(args.config) if args.config else RunConfig()
    values: dict[str, str | None] = {"preset": args.preset}
    for flag, _, _ in _RUN_FLAGS:
        name = flag[2:].replace("-", "_")
        value = getattr(args, name)
        values[name] = None if value is None else str(value)
    return config_from_mapping(values, cfg)


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=verbose)],
        force=True,
    )


def _summary(console: Console, reports) -> None:
    table = Table(show_header=True)
    for column in ("run", "status", "N", "L", "setup [s]", "solve [s]", "linf"):
        table.add_column(column)
    for r in reports:
        table.add_row(r.run_id, r.status.value, str(r.n_unknowns), str(r.level),
                      f"{r.setup_seconds:.3e}", f"{r.solve_seconds:.3e}", f"{r.linf_rel_error:.3e}")
    console.print(table)


_ARTIFACT_FLAGS = (("dump_tree", "tree"), ("history", "history"))


def _write_artifacts(args: argparse.Namespace, report: SolveReport) -> None:
    for flag, name in _ARTIFACT_FLAGS:
        path = getattr(args, flag)
        if not path:
            continue
        text = report.artifacts.get(name)
        if text is None:
            logger.warning("%s run has no %s to write", report.solver.value, name)
            continue
        with open(path, "w") as fh:
            fh.write(text)
        logger.info("wrote %s", os.path.abspath(path))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    console = Console()
    try:
        if args.command in ("run", "sweep"):
            from ..arena import Arena

            arena = Arena(ArenaSettings.from_env())
            arena.event_bus.subscribe(console_event_handler)
            cfg = with_settings(config_from_args(args), arena.settings)
            if args.command == "run":
                report = arena.run(cfg)
                reports, final = [report], report
            else:
                result = arena.sweep(cfg, cfg.target, args.steps)
                reports, final = result.sweep, result.report
            _summary(console, reports)
            if args.out:
                write_reports(args.out, reports)
            _write_artifacts(args, final)
            if final.status == RunStatus.FAILED:
                console.print(f"[red]{final.message}[/red]")
                return EXIT_ERROR
            return EXIT_OK if final.ok else EXIT_NOT_ACHIEVED

        reports = [r for path in args.reports for r in read_reports(path)]
        if args.command == "table":
            for path in write_table(reports, args.out):
                console.print(f"wrote {os.path.abspath(path)}")
            return EXIT_OK

        fits = fit_constants(reports, args.column, args.fmm_model)
        table = Table(show_header=True)
        for column in ("solver", "model", "constant", "sigma", "max residual", "runs"):
            table.add_column(column)
        for fit in fits.values():
            table.add_row(fit.solver.value, fit.model, f"{fit.constant:.4e}", f"{fit.sigma:.2e}",
                          f"{100 * fit.max_residual:.1f}%", str(fit.count))
        console.print(table)
        return EXIT_OK
    except ArenaError as e:
        logger.error("%s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
