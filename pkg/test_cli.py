import csv
import logging

import pandas as pd
import pytest

from cli.ssi_bench import RUN_COLUMNS, SWEEP_COLUMNS, main, run_benchmark
from config import RunConfig, log_level
from errors import InvalidFlag
from models import get_benchmark
from runtime import Algo
from scripts.sample_report import report_rows


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_run_writes_one_row_per_step(tmp_path, capsys):
    out = tmp_path / "k.csv"
    assert main(["run", "--model", "kalman1d", "--steps", "7", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == RUN_COLUMNS
    assert len(rows) == 8
    assert [r[0] for r in rows[1:]] == [str(t) for t in range(7)]
    assert all(r[-1] == "" for r in rows[1:])
    assert "✅ kalman1d/ssi n=1" in capsys.readouterr().out


def test_run_reports_zero_draws_for_wheels(tmp_path, capsys):
    assert main(["run", "--model", "wheels", "--steps", "20", "--out", str(tmp_path / "w.csv")]) == 0
    assert "draw_count=0" in capsys.readouterr().out
    rows = read_rows(tmp_path / "w.csv")
    assert {r[6] for r in rows[1:]} == {"0"}


def test_run_is_reproducible(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert main(["run", "--model", "outlier", "--algo", "pf", "--particles", "20",
                     "--steps", "15", "--seed", "3", "--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_run_default_output_path(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["run", "--model", "beta-bernoulli", "--steps", "3"]) == 0
    assert (tmp_path / "beta-bernoulli_ssi.csv").exists()


@pytest.mark.parametrize("argv", [
    ["run", "--model", "bicycle", "--steps", "3"],
    ["run", "--model", "kalman1d", "--particles", "0", "--steps", "3"],
    ["run", "--model", "kalman1d", "--algo", "mcmc", "--steps", "3"],
    ["run", "--model", "kalman1d,tree", "--steps", "3"],
])
def test_bad_flags_exit_with_usage_error(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2
    assert "❌" in capsys.readouterr().err


def test_sweep_summary(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--model", "kalman1d", "--algo", "pf", "--particles", "5,20",
            "--seeds", "3", "--steps", "6", "--out", str(out)]
    assert main(argv) == 0
    summary = pd.read_csv(out)
    assert list(summary.columns) == SWEEP_COLUMNS
    assert list(summary["particles"]) == [5, 20]
    assert (summary["seeds"] == 3).all()
    assert (summary["mse_q10"] <= summary["mse_median"]).all()
    assert (summary["mse_median"] <= summary["mse_q90"]).all()
    assert summary["latency_median_ns"].isna().all()
    assert "Finished 6 run(s)" in capsys.readouterr().out


def test_sweep_single_seed_has_flat_quantiles(tmp_path):
    out = tmp_path / "one.csv"
    assert main(["sweep", "--model", "wheels", "--seeds", "1", "--steps", "4",
                 "--timing", "--out", str(out)]) == 0
    row = pd.read_csv(out).iloc[0]
    assert row["mse_q10"] == row["mse_median"] == row["mse_q90"]
    assert row["latency_median_ns"] > 0


def test_dot_export(tmp_path):
    dot = tmp_path / "state.dot"
    assert main(["run", "--model", "wheels", "--steps", "2", "--dot", str(dot),
                 "--out", str(tmp_path / "w.csv")]) == 0
    text = dot.read_text(encoding="utf-8")
    assert text.startswith("digraph state {")
    assert "->" in text


def test_trace_goes_to_stderr(tmp_path, capsys):
    assert main(["run", "--model", "wheels", "--steps", "1", "--trace",
                 "--out", str(tmp_path / "w.csv")]) == 0
    err = capsys.readouterr().err.splitlines()
    assert err[:2] == ["swap X1 X2 ok", "swap X0 X2 ok"]
    assert not logging.getLogger("ssi.trace").handlers


def test_run_benchmark_timing():
    result = run_benchmark(get_benchmark("kalman1d"), Algo.SSI, 1, 5, timing=True)
    assert all(isinstance(r[-1], int) and r[-1] > 0 for r in result.rows)
    assert result.latency_ns > 0
    assert result.draw_total == 0


def test_config_from_flags():
    cfg = RunConfig.from_flags(models="tree", algos="pf,ssi", particles="10, 100", steps=None)
    assert cfg.algos == [Algo.PF, Algo.SSI]
    assert cfg.particles == [10, 100]
    assert cfg.steps == 500
    with pytest.raises(InvalidFlag, match="particles"):
        RunConfig.from_flags(models="tree", particles="-1")
    with pytest.raises(InvalidFlag):
        RunConfig.from_flags(models="tree", steps=-3)


def test_log_level(monkeypatch):
    monkeypatch.setenv("SSI_LOG_LEVEL", "debug")
    assert log_level() == logging.DEBUG
    monkeypatch.setenv("SSI_LOG_LEVEL", "chatty")
    assert log_level() == logging.WARNING
    monkeypatch.delenv("SSI_LOG_LEVEL")
    assert log_level() == logging.WARNING


def test_report_rows(capsys):
    rows = report_rows(steps=5, pf_particles=5)
    status = {(r["model"], r["algo"]): r["status"] for r in rows}
    assert status[("wheels", "ssi")] == "exact"
    assert status[("kalman1d", "ssi")] == "exact"
    assert status[("gaussian-gaussian", "ssi")] == "fallback"
    assert status[("outlier", "ssi")] == "fallback"
    assert status[("tree", "pf")] == "approx"
    assert len(rows) == 12
