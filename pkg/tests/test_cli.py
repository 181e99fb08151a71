import csv
import io
import json
import subprocess
import sys

import pytest

import qspectra.cli as cli
from qspectra.cli import fmt, run_cli
from qspectra.spectra import ConvergenceError


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"distribution": "q_rademacher", "y": 0.25, "n_grid": [40, 80], "replications": 3, "seed": 5, "v": "auto"}))
    return path


def test_rate_sweep_writes_csv_and_summary(tmp_path, cfg_file):
    out = tmp_path / "rate.csv"
    assert run_cli(["rate-sweep", "--config", str(cfg_file), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["n", "p", "y_p", "a_n", "mean_ks", "ks_std", "pooled_ks", "bound_thm1", "bound_thm2"]
    assert [r["n"] for r in rows] == ["40", "80"]
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["config"]["seed"] == 5
    assert summary["version"].startswith("v")
    assert "sweep" in summary["timing_seconds"]
    assert set(summary["v_by_n"]) == {"40", "80"}


def test_rate_sweep_byte_identical(tmp_path, cfg_file):
    outs = []
    for name, workers in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "2")):
        out = tmp_path / name
        assert run_cli(["rate-sweep", "--config", str(cfg_file), "--out", str(out), "--workers", workers]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_flags_override_config(tmp_path, cfg_file):
    out = tmp_path / "o.csv"
    assert run_cli(["rate-sweep", "--config", str(cfg_file), "--out", str(out), "--n-grid", "30", "--seed", "9"]) == 0
    assert [r["n"] for r in read_csv(out)] == ["30"]
    assert json.loads(out.with_suffix(".json").read_text())["config"]["seed"] == 9


def test_stdout_when_no_out(capsys):
    assert run_cli(["mp-eval", "--y", "0.25", "--x", "0.25", "1.0"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[0]["cdf"] == "0"
    assert 0 < float(rows[1]["cdf"]) < 1


def test_mp_eval_with_stieltjes(tmp_path):
    out = tmp_path / "mp.csv"
    assert run_cli(["mp-eval", "--y", "1", "--x", "1", "--v", "0.5", "--out", str(out)]) == 0
    (row,) = read_csv(out)
    assert float(row["stieltjes_im"]) > 0


def test_bai_bound_holds(tmp_path):
    out = tmp_path / "bai.csv"
    assert run_cli(["bai-bound", "--y", "0.25", "--n", "400", "--seed", "3", "--v", "0.1", "--out", str(out)]) == 0
    (row,) = read_csv(out)
    assert float(row["observed_ks"]) <= float(row["total"])
    assert row["holds"] == "true"


def test_reflection_command(tmp_path):
    out = tmp_path / "refl.csv"
    assert run_cli(["reflection", "--draws", "3", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 3
    assert all(r["zero_count"] == r["expected_zero_count"] == "6" for r in rows)


def test_variance_and_lambda_max(tmp_path):
    out = tmp_path / "var.csv"
    args = ["--n-grid", "20", "40", "--replications", "3", "--out"]
    assert run_cli(["variance", *args, str(out)]) == 0
    assert [r["low_confidence"] for r in read_csv(out)] == ["true", "true"]
    assert run_cli(["lambda-max", *args, str(out)]) == 0
    assert len(read_csv(out)) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["rate-sweep", "--n-grid", "100", "50"],
        ["rate-sweep", "--config", "/nonexistent.json"],
        ["reflection", "--p", "3", "--n", "3"],
        ["bai-bound", "--y", "0.001", "--n", "10"],
        ["bai-bound", "--y", "0.25", "--n", "40", "--v", "0"],
        ["mp-eval", "--y", "-1", "--x", "0"],
        ["variance", "--n-grid", "100", "--v", "0.05"],
        ["no-such-command"],
        ["rate-sweep", "--replications", "many"],
    ],
)
def test_config_errors_exit_1(argv):
    assert run_cli(argv) == 1


def test_numerical_failure_exit_2(monkeypatch, capsys):
    def boom(cfg):
        raise ConvergenceError("QL stalled [n=100, p=25, seed=0, replication=3]")

    monkeypatch.setattr(cli, "rate_sweep", boom)
    assert run_cli(["rate-sweep", "--n-grid", "100"]) == 2
    assert "n=100" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert run_cli(["--help"]) == 0


def test_fmt_is_locale_free():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3"
    assert fmt(True) == "true"
    assert fmt(float("inf")) == "inf"


def test_console_entry_point(tmp_path):
    out = tmp_path / "mp.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "qspectra.cli", "mp-eval", "--y", "0.25", "--x", "0.25", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert read_csv(out)[0]["cdf"] == "0"
