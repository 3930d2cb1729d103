"""CSV report files and solver comparison tables with gnuplot scripts."""

from __future__ import annotations

import csv
import io
import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from ..problems.cases import parse_case
from ..shared.errors import InvalidArgumentError
from ..shared.types import REPORT_COLUMNS, SolveReport

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["solver", "p", "param", "T", "linf", "L", "N", "setup", "solve", "iterations"]


def reports_csv(reports: Iterable[SolveReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerow(report.to_row())
    return buffer.getvalue()


def write_reports(path: str, reports: Iterable[SolveReport]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(reports_csv(reports))
    logger.info("wrote %s", path)


def read_reports(path: str) -> list[SolveReport]:
    if not os.path.exists(path):
        raise InvalidArgumentError(f"report file {path} not found")
    with open(path, newline="") as fh:
        return [SolveReport.from_row(row) for row in csv.DictReader(fh)]


def _case_parameter(case: str) -> str:
    tc = parse_case(case)
    return str(tc.k) if tc.kind == "osc" else f"{tc.alpha:g}"


@dataclass
class ComparisonTable:
    case: str
    data: str  # whitespace-separated rows, one gnuplot index block per solver
    script: str


def compare_table(reports: list[SolveReport], stem: str = "table") -> ComparisonTable:
    """Table-style rows (p = threads, k or alpha, T, linf, L, N) plus a gnuplot script.

    There is no communication column: every run is single-node.
    """
    if not reports:
        raise InvalidArgumentError("compare_table needs at least one report")
    cases = sorted({r.case for r in reports})
    if len(cases) > 1:
        raise InvalidArgumentError(f"one table per test case, got {', '.join(cases)}")
    case = cases[0]
    param = _case_parameter(case)

    by_solver: dict[str, list[SolveReport]] = defaultdict(list)
    for r in reports:
        by_solver[r.solver.value].append(r)

    lines = [f"# case {case}; T = setup + solve seconds; no Comm column (single node)",
             "# " + " ".join(TABLE_COLUMNS)]
    for solver in sorted(by_solver):
        lines.append(f"# {solver}")
        for r in sorted(by_solver[solver], key=lambda r: r.n_unknowns):
            iterations = "-" if r.iterations is None else str(r.iterations)
            lines.append(" ".join([
                solver, str(r.threads), param, f"{r.setup_seconds + r.solve_seconds:.4e}",
                f"{r.linf_rel_error:.3e}", str(r.level), str(r.n_unknowns),
                f"{r.setup_seconds:.4e}", f"{r.solve_seconds:.4e}", iterations,
            ]))
        lines.extend(["", ""])
    data = "\n".join(lines).rstrip("\n") + "\n"

    plots = [f"'{stem}.dat' index {i} using 7:5 with linespoints title '{solver}'"
             for i, solver in enumerate(sorted(by_solver))]
    script = "\n".join([
        f"set title 'linf error vs N, {case}'",
        "set logscale xy",
        "set xlabel 'N'",
        "set ylabel 'relative linf error'",
        "set key top right",
        "set terminal pngcairo size 800,600",
        f"set output '{stem}.png'",
        "plot " + ", \\\n     ".join(plots),
    ]) + "\n"
    return ComparisonTable(case, data, script)


def write_table(reports: list[SolveReport], stem: str) -> tuple[str, str]:
    table = compare_table(reports, os.path.basename(stem))
    paths = (stem + ".dat", stem + ".gp")
    for path, text in zip(paths, (table.data, table.script)):
        with open(path, "w") as fh:
            fh.write(text)
    logger.info("wrote %s and %s", *paths)
    return paths
