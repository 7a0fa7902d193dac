import json

import numpy as np
import pytest

from yardsale import GiniTrace
from yardsale.cli import run_cli
from yardsale.io_csv import (
    read_distribution,
    read_trace,
    write_aggregate_trace,
    write_snapshot,
    write_trace,
)


def _write_samples(path, values) -> str:
    write_snapshot(path, np.asarray(values, dtype=float))
    return str(path)


# ---------------------------------------------------------------- metrics

def test_metrics_equal_samples(tmp_path, capsys):
    src = _write_samples(tmp_path / "w.csv", [1.0, 1.0, 1.0, 1.0])
    assert run_cli(["metrics", "--input", src]) == 0
    out = capsys.readouterr().out
    assert "G = 0.0" in out
    assert "n = 4" in out


def test_metrics_writes_lorenz_curve(tmp_path, capsys):
    src = _write_samples(tmp_path / "w.csv", [1.0, 3.0])
    dest = tmp_path / "lorenz.csv"
    assert run_cli(["metrics", "--input", src, "--lorenz-out", str(dest)]) == 0
    lines = dest.read_text().splitlines()
    assert lines[0] == "F,L"
    assert len(lines) == 4                      # (0,0), (0.5,0.25), (1,1)
    assert lines[2] == "0.5,0.25"
    assert "G = 0.25" in capsys.readouterr().out


# ---------------------------------------------------------------- agents

@pytest.mark.slow
def test_simulate_agents_reruns_byte_identical(tmp_path, capsys):
    def go(name: str) -> bytes:
        out = tmp_path / name
        code = run_cli([
            "simulate-agents", "--out", str(out), "--seed", "7",
            "--agents", "50", "--transactions", "2000", "--replicas", "2",
            "--record-every", "500", "--eta", "uniform", "--beta0", "0.2",
            "--initial", "equal",
        ])
        assert code == 0
        return (out / "aggregate.csv").read_bytes()

    first = go("a")
    second = go("b")
    assert first == second
    out_dir = tmp_path / "a"
    assert (out_dir / "trace_replica_000.csv").exists()
    assert (out_dir / "wealths_replica_001.csv").exists()
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config"]["agents"]["agents"] == 50
    assert manifest["config"]["run"]["seed"] == 7
    assert "aggregate.csv" in manifest["outputs"]
    assert "mean G:" in capsys.readouterr().out


# ---------------------------------------------------------------- solvers

def test_solve_fp_records_monotone_trace_and_derived_gamma(tmp_path):
    out = tmp_path / "fp"
    code = run_cli([
        "solve-fp", "--out", str(out), "--grid", "log", "--nodes", "64",
        "--wmax", "50", "--wfirst", "0.01", "--steps", "50",
        "--record-every", "10", "--eta", "uniform", "--beta0", "0.3",
    ])
    assert code == 0
    trace = read_trace(out / "trace.csv")
    assert np.all(np.diff(trace.gini) >= -1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["fp"]["gamma"] == pytest.approx(0.3 ** 2 / 3.0)
    assert read_distribution(out / "final.csv").grid.n_nodes == 64


def test_solve_fp_explicit_gamma_wins(tmp_path):
    out = tmp_path / "fp2"
    code = run_cli([
        "solve-fp", "--out", str(out), "--nodes", "64", "--wfirst", "0.01",
        "--steps", "5", "--gamma", "0.02",
    ])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["fp"]["gamma"] == 0.02


@pytest.mark.slow
def test_solve_boltzmann_writes_trace_and_checkpoints(tmp_path, capsys):
    out = tmp_path / "bz"
    code = run_cli([
        "solve-boltzmann", "--out", str(out), "--nodes", "64", "--wfirst", "0.01",
        "--steps", "20", "--nbeta", "8", "--record-every", "5",
        "--checkpoint-every", "10", "--eta", "twopoint", "--beta0", "0.2",
    ])
    assert code == 0
    trace = read_trace(out / "trace.csv")
    assert len(trace) == 5
    assert np.all(np.diff(trace.gini) >= -1e-6)
    assert (out / "checkpoint_0000010.csv").exists()
    assert "split-rate tolerances" in capsys.readouterr().out


# ---------------------------------------------------------------- analyze

def _trace_file(path, gini):
    g = np.asarray(gini, dtype=float)
    t = np.arange(g.size, dtype=float)
    one = np.ones_like(g)
    write_trace(path, GiniTrace(t=t, gini=g, n_agents=one, total_wealth=one, rate=one))
    return str(path)


def test_analyze_trace_pass_and_condensation_fail(tmp_path, capsys):
    src = _trace_file(tmp_path / "t.csv", np.linspace(0.3, 0.6, 10))
    assert run_cli(["analyze", "--out", str(tmp_path / "r1"), "--trace", src]) == 0
    assert "PASS" in capsys.readouterr().out
    code = run_cli(["analyze", "--out", str(tmp_path / "r2"), "--trace", src,
                    "--condensation", "0.99"])
    assert code == 1
    out = capsys.readouterr().out
    assert "condensation check" in out and "FAIL" in out
    assert (tmp_path / "r2" / "report.txt").exists()


def test_analyze_flags_violation_with_exit_1(tmp_path, capsys):
    g = np.linspace(0.3, 0.6, 10)
    g[5] = g[4] - 0.05
    src = _trace_file(tmp_path / "t.csv", g)
    assert run_cli(["analyze", "--out", str(tmp_path / "r"), "--trace", src]) == 1
    assert "VIOLATION" in capsys.readouterr().out


def test_analyze_aggregate_stochastic_tolerance(tmp_path, capsys):
    t = np.arange(5.0)
    gm = np.array([0.30, 0.32, 0.315, 0.33, 0.34])   # dip within 3 stderr
    se = np.full(5, 0.01)
    path = tmp_path / "agg.csv"
    write_aggregate_trace(path, t, gm, se)
    assert run_cli(["analyze", "--out", str(tmp_path / "r"), "--aggregate", str(path)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_analyze_pareto_fit_output(tmp_path, capsys):
    rng = np.random.default_rng(5)
    src = _write_samples(tmp_path / "w.csv", 1.0 + rng.pareto(2.0, size=20_000))
    code = run_cli(["analyze", "--out", str(tmp_path / "r"), "--pareto", src,
                    "--pareto-wmin", "1.0"])
    assert code == 0
    out = capsys.readouterr().out
    assert "tail fit: alpha = 2.0" in out


def test_analyze_without_inputs_is_config_error(tmp_path, capsys):
    assert run_cli(["analyze", "--out", str(tmp_path / "r")]) == 2
    assert "config error" in capsys.readouterr().err


# ---------------------------------------------------------------- ingest

def test_ingest_bins_conserve_count_and_wealth(tmp_path, capsys):
    rng = np.random.default_rng(3)
    w = rng.exponential(1.0, size=400)
    src = _write_samples(tmp_path / "w.csv", w)
    out = tmp_path / "run"
    code = run_cli(["ingest", "--input", src, "--out", str(out), "--bin",
                    "--nodes", "128", "--wmax", "50", "--wfirst", "0.001"])
    assert code == 0
    dist = read_distribution(out / "distribution.csv")
    from yardsale import moments
    n, total = moments(dist)
    assert n == pytest.approx(400.0, rel=1e-12)
    assert total == pytest.approx(w.sum(), rel=1e-12)
    stdout = capsys.readouterr().out
    assert "binned: N = 400" in stdout
    assert "beyond w_max: 0" in stdout


def test_ingest_identical_samples_report_zero_gini(tmp_path, capsys):
    src = _write_samples(tmp_path / "w.csv", [2.5] * 10)
    assert run_cli(["ingest", "--input", src, "--out", str(tmp_path / "r")]) == 0
    assert "sample G: 0.000000" in capsys.readouterr().out


@pytest.mark.slow
def test_ingest_pareto_draw_gini_near_one_third(tmp_path, capsys):
    rng = np.random.default_rng(12)
    src = _write_samples(tmp_path / "w.csv", 1.0 + rng.pareto(2.0, size=100_000))
    assert run_cli(["ingest", "--input", src, "--out", str(tmp_path / "r")]) == 0
    line = [l for l in capsys.readouterr().out.splitlines() if "sample G" in l][0]
    g = float(line.split("sample G:")[1])
    assert abs(g - 1.0 / 3.0) < 0.01


def test_ingest_rejects_bad_rows_with_numbers(tmp_path, capsys):
    src = tmp_path / "w.csv"
    src.write_text("w\n1.0\n-3.0\n2.0\n")
    assert run_cli(["ingest", "--input", str(src), "--out", str(tmp_path / "r")]) == 1
    err = capsys.readouterr().err
    assert "row 3" in err and "negative" in err


def test_ingest_empty_file_fails(tmp_path, capsys):
    src = tmp_path / "w.csv"
    src.write_text("")
    assert run_cli(["ingest", "--input", str(src), "--out", str(tmp_path / "r")]) == 1
    assert "error" in capsys.readouterr().err


# ---------------------------------------------------------------- config

def test_ini_config_with_flag_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[grid]\nnodes = 32\nwmax = 10\nwfirst = 0.01\n[fp]\nsteps = 5\n")
    out = tmp_path / "r"
    # wmax 10 leaves an e^-10 exponential tail beyond the grid, worth a warning
    with pytest.warns(UserWarning, match="tail beyond w_max"):
        code = run_cli(["solve-fp", "--config", str(ini), "--out", str(out),
                        "--nodes", "48", "--gamma", "0.01"])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["grid"]["nodes"] == 48      # flag beats file
    assert manifest["config"]["grid"]["wmax"] == 10.0     # file beats default
    assert manifest["config"]["fp"]["steps"] == 5


def test_missing_and_malformed_config_exit_2(tmp_path, capsys):
    assert run_cli(["solve-fp", "--config", str(tmp_path / "nope.ini"),
                    "--out", str(tmp_path / "r")]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[grid\nnodes = 32\n")
    assert run_cli(["solve-fp", "--config", str(bad), "--out", str(tmp_path / "r")]) == 2
    unparsable = tmp_path / "weird.ini"
    unparsable.write_text("[grid]\nnodes = lots\n")
    assert run_cli(["solve-fp", "--config", str(unparsable),
                    "--out", str(tmp_path / "r")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_parameter_values_exit_2(tmp_path, capsys):
    assert run_cli(["solve-fp", "--out", str(tmp_path / "a"), "--beta0", "1.5"]) == 2
    assert run_cli(["solve-fp", "--out", str(tmp_path / "b"), "--nodes", "4"]) == 2
    assert run_cli(["simulate-agents", "--out", str(tmp_path / "c"),
                    "--agents", "1"]) == 2
    capsys.readouterr()


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        run_cli(["metrics", "--input", "x.csv", "--frobnicate"])
    assert err.value.code == 2


def test_version_flag():
    with pytest.raises(SystemExit) as err:
        run_cli(["--version"])
    assert err.value.code == 0
