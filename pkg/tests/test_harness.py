import csv
import dataclasses
import math

import numpy as np
import pytest

from src.harness.cli import EXIT_ERROR, EXIT_NOT_ACHIEVED, EXIT_OK, main
from src.harness.config import ArenaSettings, config_from_mapping, load_run_file, with_settings
from src.harness.fit import fit_constants
from src.harness.report import compare_table, read_reports, reports_csv, write_reports
from src.harness.sweep import find_min_N, grow, schedule
from src.octree.tree import load_tree
from src.problems import linf_rel_error, parse_case
from src.shared.errors import ConfigurationError, InvalidArgumentError
from src.shared.events import EventType
from src.shared.types import VOLATILE_COLUMNS, RunConfig, RunStatus, SolveReport, SolverId, ToleranceMode


def fft_config(**kwargs) -> RunConfig:
    return RunConfig(solver=SolverId.FFT, case="osc:k=4", **kwargs)


def report(solver: SolverId, n: int, seconds: float, case: str = "osc:k=4", **kwargs) -> SolveReport:
    return SolveReport(f"{solver.value}-{n}", solver, case, n_unknowns=n, solve_seconds=seconds,
                       linf_rel_error=1e-6, **kwargs)


# --- configuration ---

def test_settings_from_env(monkeypatch):
    monkeypatch.setenv("ARENA_SAMPLE_COUNT", "50")
    monkeypatch.setenv("ARENA_FFT_M2L", "yes")
    monkeypatch.setenv("ARENA_TOL_MODE", "absolute")
    monkeypatch.setenv("ARENA_IMAGE_LAYERS", "3")
    s = ArenaSettings.from_env()
    assert s.sample_count == 50
    assert s.fft_m2l is True
    assert s.tol_mode == ToleranceMode.ABSOLUTE
    assert s.image_layers == 3
    assert s.cache_dir is None


@pytest.mark.parametrize("name,value", [
    ("ARENA_FFT_M2L", "maybe"),
    ("ARENA_UP_CHECK_RATIO", "1.0"),
    ("ARENA_SAMPLE_COUNT", "many"),
    ("ARENA_TOL_MODE", "loose"),
    ("ARENA_THREADS", "0"),
])
def test_bad_settings(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigurationError):
        ArenaSettings.from_env()


def test_preset_then_explicit_values():
    cfg = config_from_mapping({"preset": "fmm-high", "q": "8", "target": "1e-6"})
    assert cfg.solver == SolverId.FMM
    assert (cfg.q, cfg.m) == (8, 10)
    assert cfg.target == 1e-6
    assert config_from_mapping({"preset": "gmg-4"}).order() == 4
    assert config_from_mapping({"target": "inf"}).target == math.inf


@pytest.mark.parametrize("values", [{"solver": "mg"}, {"colour": "red"}, {"n": "big"}, {"preset": "fast"},
                                    {"periodic": "perhaps"}])
def test_bad_run_values(values):
    with pytest.raises(ConfigurationError):
        config_from_mapping(values)


def test_run_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text('# layer run\nsolver=gmg\ncase="layer:alpha=10,R=0.25"\ne=4\nq=2\nperiodic=false\n')
    cfg = load_run_file(str(path))
    assert cfg.solver == SolverId.GMG
    assert cfg.case == "layer:alpha=10,R=0.25"
    assert (cfg.e, cfg.order(), cfg.periodic) == (4, 2, False)
    with pytest.raises(ConfigurationError):
        load_run_file(str(tmp_path / "missing.env"))


def test_threads_from_settings():
    cfg = with_settings(RunConfig(), ArenaSettings(threads=4))
    assert cfg.threads == 4
    assert with_settings(RunConfig(threads=2), ArenaSettings(threads=4)).threads == 2


def test_run_id_and_echo():
    cfg = fft_config(n=16)
    assert cfg.run_id == "fft-osc:k=4-n16"
    assert cfg.echo() == {"threads": 1, "seed": 0, "n": 16}
    gmg = RunConfig(solver=SolverId.GMG, e=4)
    assert gmg.order() == 1
    assert gmg.run_id == "gmg-osc:k=1-q1e4"


# --- single runs ---

def test_fft_run_is_machine_accurate(arena):
    events = []
    arena.event_bus.subscribe(events.append)
    r = arena.run(fft_config(n=16, target=1e-10))
    assert r.status == RunStatus.OK
    assert r.linf_rel_error <= 1e-12
    assert r.n_unknowns == 4096
    assert r.level == 4
    assert r.setup_seconds >= 0.0 and r.solve_seconds >= 0.0
    assert [e.type for e in events] == [EventType.RUN_STARTED, EventType.PHASE_DONE,
                                        EventType.PHASE_DONE, EventType.RUN_DONE]


def test_underresolved_gmg_misses_the_target(arena):
    r = arena.run(RunConfig(solver=SolverId.GMG, e=4, q=1, target=1e-3))
    assert r.status == RunStatus.NOT_ACHIEVED
    assert r.linf_rel_error > 1e-1
    assert r.iterations is not None and r.iterations > 0
    assert r.n_unknowns == 64


@pytest.mark.parametrize("cfg,fragment", [
    (RunConfig(case="layer:alpha=1"), "alpha"),
    (RunConfig(solver=SolverId.GMG, e=3), "power of two"),
    (RunConfig(solver=SolverId.FFT, n=1), "n >= 2"),
])
def test_invalid_run_becomes_failed_report(arena, cfg, fragment):
    r = arena.run(cfg)
    assert r.status == RunStatus.FAILED
    assert fragment in r.message
    assert math.isnan(r.linf_rel_error)


def test_iteration_cap_becomes_failed_report(arena):
    r = arena.run(RunConfig(solver=SolverId.GMG, e=8, max_iter=1))
    assert r.status == RunStatus.FAILED
    assert r.iterations == 1


def test_runs_are_reproducible(arena):
    a, b = arena.run(fft_config(n=8)), arena.run(fft_config(n=8))
    assert a.linf_rel_error == b.linf_rel_error
    assert a.run_id == b.run_id


# --- sweeps ---

def test_growth_schedule():
    assert [c.n for c in schedule(fft_config(n=8), 3)] == [8, 16, 32]
    assert grow(RunConfig(solver=SolverId.GMG, e=4), 2).e == 16
    assert grow(RunConfig(solver=SolverId.FMM, depth=3), 1).depth == 4
    with pytest.raises(InvalidArgumentError):
        schedule(fft_config(), 0)


def test_sweep_stops_once_the_mode_is_resolved(arena):
    result = find_min_N(fft_config(n=8), 1e-7, 4, arena)
    assert result.achieved
    assert result.report.params["n"] == 16
    assert [r.params["n"] for r in result.sweep] == [8, 16]
    assert result.sweep[0].linf_rel_error > 1e-7
    assert result.report.linf_rel_error <= 1e-7


def test_sweep_with_infinite_target_returns_the_first_point(arena):
    result = arena.sweep(fft_config(n=8))
    assert result.achieved
    assert len(result.sweep) == 1


def test_exhausted_sweep_reports_the_best_point(arena):
    result = find_min_N(fft_config(n=8), 1e-20, 2, arena)
    assert not result.achieved
    assert result.report.status == RunStatus.NOT_ACHIEVED
    assert result.report.params["n"] == 16
    assert "not reached" in result.report.message


# --- reports, tables and fits ---

def test_reports_file_round_trip(tmp_path):
    rs = [report(SolverId.FFT, 4096, 0.01, counters={"N_U": 3}, warnings=["removed source mean 1e-3"]),
          report(SolverId.GMG, 512, 0.5, iterations=7, params={"q": 1})]
    path = tmp_path / "reports.csv"
    write_reports(str(path), rs)
    back = read_reports(str(path))
    assert back == rs
    with pytest.raises(InvalidArgumentError):
        read_reports(str(tmp_path / "nothing.csv"))


def test_compare_table():
    rs = [report(SolverId.FFT, 4096, 0.01), report(SolverId.GMG, 512, 0.5, iterations=7)]
    table = compare_table(rs, stem="t8")
    rows = [line for line in table.data.splitlines() if line and not line.startswith("#")]
    assert len(rows) == 2
    assert rows[0].split()[:3] == ["fft", "1", "4"]
    assert rows[1].split()[-1] == "7"
    assert "Comm" in table.data
    assert "'t8.dat' index 1" in table.script


def test_compare_table_errors():
    with pytest.raises(InvalidArgumentError):
        compare_table([])
    with pytest.raises(InvalidArgumentError):
        compare_table([report(SolverId.FFT, 64, 0.1), report(SolverId.FFT, 64, 0.1, case="osc:k=2")])


def test_fit_recovers_exact_constants():
    c = 3.5e-8
    rs = [report(SolverId.GMG, n, c * n) for n in (1000, 4000, 16000)]
    rs += [report(SolverId.FFT, n, c * n * np.log2(n)) for n in (4096, 32768, 262144)]
    fits = fit_constants(rs)
    for solver in (SolverId.GMG, SolverId.FFT):
        assert fits[solver].constant == pytest.approx(c, rel=1e-10)
        assert fits[solver].sigma < 1e-12 * c
        assert fits[solver].max_residual < 1e-10
    assert fits[SolverId.FFT].model == "N log2 N"


def test_fit_fmm_near_work_model():
    rs = [report(SolverId.FMM, n, 2e-9 * 6 ** 6 * 27 * n, params={"q": 6}, counters={"N_U": 27 * n})
          for n in (512, 4096, 32768)]
    fit = fit_constants(rs, fmm_model="u")[SolverId.FMM]
    assert fit.model == "q^6 N_U"
    assert fit.constant == pytest.approx(2e-9, rel=1e-10)


def test_fit_needs_spread():
    with pytest.raises(InvalidArgumentError):
        fit_constants([report(SolverId.GMG, n, 1.0) for n in (1000, 2000, 3000)])
    with pytest.raises(InvalidArgumentError):
        fit_constants([report(SolverId.GMG, n, 1.0) for n in (1000, 8000)])


# --- command line ---

@pytest.fixture
def quiet_env(monkeypatch):
    monkeypatch.setenv("ARENA_SAMPLE_COUNT", "200")


def stable_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: v for k, v in row.items() if k not in VOLATILE_COLUMNS} for row in csv.DictReader(fh)]


def test_cli_run_writes_stable_reports(quiet_env, tmp_path):
    argv = ["run", "--solver", "fft", "--case", "osc:k=4", "--n", "16", "--target", "1e-10"]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(first)]) == EXIT_OK
    assert main(argv + ["--out", str(second)]) == EXIT_OK
    assert stable_rows(first) == stable_rows(second)
    assert stable_rows(first)[0]["status"] == "ok"


def test_cli_exit_codes(quiet_env, tmp_path):
    assert main(["run", "--solver", "gmg", "--e", "4", "--target", "1e-3"]) == EXIT_NOT_ACHIEVED
    assert main(["run", "--case", "layer:alpha=1"]) == EXIT_ERROR
    assert main(["run", "--solver", "spectral"]) == EXIT_ERROR
    run_file = tmp_path / "run.env"
    run_file.write_text("solver=fft\ncase=osc:k=2\nn=8\n")
    assert main(["sweep", "--config", str(run_file), "--target", "1e-10", "--steps", "2"]) == EXIT_OK


def test_cli_writes_gmg_residual_history(quiet_env, tmp_path):
    path = tmp_path / "history.csv"
    assert main(["run", "--solver", "gmg", "--e", "4", "--rel-tol", "1e-10", "--history", str(path)]) == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,relative_residual"
    residuals = [float(line.split(",")[1]) for line in lines[1:]]
    assert residuals and residuals[-1] <= 1e-10


def test_cli_history_of_a_capped_gmg_run(quiet_env, tmp_path):
    path = tmp_path / "history.csv"
    assert main(["run", "--solver", "gmg", "--e", "8", "--max-iter", "2", "--history", str(path)]) == EXIT_ERROR
    assert len(path.read_text().splitlines()) == 3


def test_cli_dumps_the_fmm_tree(quiet_env, tmp_path):
    path = tmp_path / "tree.txt"
    argv = ["run", "--solver", "fmm", "--q", "3", "--m", "4", "--depth", "1", "--min-depth", "1"]
    assert main(argv + ["--dump-tree", str(path)]) == EXIT_OK
    tree = load_tree(path.read_text())
    assert len(tree.leaves) == 8
    assert tree.depth == 1


def test_cli_skips_artifacts_the_solver_does_not_produce(quiet_env, tmp_path):
    path = tmp_path / "tree.txt"
    assert main(["run", "--solver", "fft", "--n", "8", "--dump-tree", str(path)]) == EXIT_OK
    assert not path.exists()


def test_cli_table_and_fit(tmp_path):
    path = tmp_path / "reports.csv"
    write_reports(str(path), [report(SolverId.GMG, n, 1e-7 * n) for n in (1000, 4000, 16000)])
    stem = tmp_path / "table"
    assert main(["table", str(path), "--out", str(stem)]) == EXIT_OK
    assert (tmp_path / "table.dat").exists() and (tmp_path / "table.gp").exists()
    assert main(["fit", str(path)]) == EXIT_OK
    assert main(["fit", str(path), "--column", "seconds_u"]) == EXIT_ERROR


def test_csv_header():
    assert reports_csv([]).strip().split(",")[:4] == ["run_id", "solver", "case", "status"]


# --- desk-scale acceptance runs ---

@pytest.mark.slow
@pytest.mark.parametrize("k", [4, 8])
def test_fft_resolves_oscillatory_case_to_machine_accuracy(arena, k):
    r = arena.run(RunConfig(solver=SolverId.FFT, case=f"osc:k={k}", n=4 * k))
    assert r.linf_rel_error <= 1e-12


@pytest.mark.slow
def test_three_solvers_agree(arena):
    tc = parse_case("osc:k=2")
    configs = [
        RunConfig(solver=SolverId.FFT, case=tc.label, n=16),
        RunConfig(solver=SolverId.GMG, case=tc.label, e=16, q=4),
        RunConfig(solver=SolverId.FMM, case=tc.label, q=6, m=4, depth=3, min_depth=3, tol=1e-4),
    ]
    samples = arena.samples(0)  # the set each report was measured on
    values, errors = [], []
    for cfg in configs:
        r = arena.run(cfg)
        assert r.status != RunStatus.FAILED, r.message
        adapter = arena.adapter(cfg.solver)
        u = adapter.solve(adapter.setup(cfg, tc)).evaluate(samples)
        values.append(u - u.mean())
        errors.append(r.linf_rel_error)
    for i in range(3):
        for j in range(i + 1, 3):
            gap = np.abs(values[i] - values[j]).max()
            assert gap <= 2.0 * (errors[i] + errors[j]) + 1e-12


@pytest.mark.slow
def test_fmm_sweep_error_decreases_with_depth(arena):
    cfg = RunConfig(solver=SolverId.FMM, case="layer:alpha=10,R=0.25", q=6, m=4, depth=2, min_depth=1, tol=1e-6)
    result = find_min_N(cfg, 1e-12, 2, arena)
    errors = [r.linf_rel_error for r in result.sweep]
    assert all(b < a for a, b in zip(errors, errors[1:]))


@pytest.mark.slow
def test_periodic_fmm_agrees_with_fft(arena):
    tc = parse_case("osc:k=1")
    samples = arena.samples(0)
    configs = [
        RunConfig(solver=SolverId.FFT, case=tc.label, n=8),
        RunConfig(solver=SolverId.FMM, case=tc.label, q=14, m=10, depth=2, min_depth=2),
    ]
    values = []
    for cfg in configs:
        adapter = arena.adapter(cfg.solver)
        outcome = adapter.solve(adapter.setup(cfg, tc))
        assert linf_rel_error(outcome.evaluate, tc, samples) <= 1e-5
        u = outcome.evaluate(samples)
        values.append(u - u.mean())
    assert np.abs(values[0] - values[1]).max() <= 1e-5 * np.abs(values[0]).max()


@pytest.mark.slow
def test_fmm_needs_fewer_unknowns_than_fft_on_the_layer(arena):
    case = "layer:alpha=10,R=0.25"
    fft = find_min_N(RunConfig(solver=SolverId.FFT, case=case, n=32), 1e-3, 4, arena)
    fmm = find_min_N(RunConfig(solver=SolverId.FMM, case=case, q=6, m=6, depth=3, min_depth=2, tol=1e-4),
                     1e-3, 4, arena)
    assert fft.achieved and fmm.achieved
    assert fft.report.n_unknowns >= 2 * fmm.report.n_unknowns


@pytest.mark.slow
def test_cost_models_fit_measured_runs(arena):
    fft = [arena.run(RunConfig(solver=SolverId.FFT, case="osc:k=2", n=n)) for n in (64, 96, 128)]
    fit = fit_constants(fft)[SolverId.FFT]
    assert fit.constant > 0 and fit.max_residual < 0.5

    fmm = [arena.run(RunConfig(solver=SolverId.FMM, case="osc:k=1", q=4, m=4, depth=d, min_depth=d))
           for d in (1, 2, 3)]
    fit = fit_constants(fmm, "seconds_u", fmm_model="u")[SolverId.FMM]
    assert fit.model == "q^6 N_U"
    assert fit.constant > 0 and fit.max_residual < 0.5


def test_unused_dataclass_fields_do_not_change_the_run_id():
    cfg = fft_config(n=16)
    assert dataclasses.replace(cfg, e=64, depth=9).run_id == cfg.run_id
