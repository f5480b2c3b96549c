"""End-to-end command-line runs on reduced sampler settings."""

import json
import subprocess
import sys

import numpy as np
import pytest

from pigp import io
from pigp.cli import main
from pigp.config import SEED_ENV, load_preset

FAST = {"chains": 2, "warmup": 100, "iters": 100}


def fast_config(tmp_path, preset, name="cfg.json", **inference):
    cfg = load_preset(preset)
    cfg["inference"] = {**cfg.get("inference", {}), **FAST, **inference}
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.mark.parametrize("preset", ["wk2", "wk2_delta", "heat", "heat_bias"])
def test_round_trip(tmp_path, capsys, preset):
    cfg = fast_config(tmp_path, preset)
    out = str(tmp_path / "run")
    assert run(["simulate", "--config", cfg, "--out", out], capsys)[0] == 0
    code, stdout, _ = run(["fit", "--config", cfg, "--out", out], capsys)
    assert code == 0, stdout
    code, stdout, err = run(["predict", "--out", out], capsys)
    assert code == 0, err
    for f in ("u.csv", "f.csv", "truth.json", "summary.json", "diagnostics.json", "draws.csv", "fit.json",
              "timing.json", "predictions.csv", "predict.json"):
        assert (tmp_path / "run" / f).is_file(), f
    summary = io.read_json(tmp_path / "run" / "summary.json")
    assert len(summary["params"]) == summary["n_params"]
    for s in summary["params"].values():
        assert {"mean", "sd", "q05", "q50", "q95", "ess", "rhat"} <= set(s)
    pred = io.read_json(tmp_path / "run" / "predict.json")
    assert pred["rmse"] is not None and pred["n_draws"] == 200
    rows = (tmp_path / "run" / "predictions.csv").read_text().splitlines()
    assert len(rows) == 1 + (400 if preset.startswith("heat") else 100)


def test_simulate_heat_sizes_and_bytes(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["simulate", "--config", "heat", "--out", str(d)], capsys)[0] == 0
    assert len((a / "u.csv").read_text().splitlines()) == 36
    assert len((a / "f.csv").read_text().splitlines()) == 21
    for f in ("u.csv", "f.csv", "truth.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_simulate_wk2_three_cycles(tmp_path, capsys):
    run(["simulate", "--config", "wk2", "--out", str(tmp_path)], capsys)
    obs = io.read_observations(tmp_path)
    assert obs.n_u == 45 and obs.n_f == 45
    assert np.unique(obs.X_u).size == 15  # folded: three replicates per time
    truth = io.read_json(tmp_path / "truth.json")
    assert truth["R"] == 1.0 and truth["C"] == 1.1 and truth["seed"] == 0


def test_fit_is_deterministic(tmp_path, capsys):
    cfg = fast_config(tmp_path, "wk2")
    for d in ("a", "b"):
        assert run(["fit", "--config", cfg, "--out", str(tmp_path / d)], capsys)[0] == 0
    for f in ("summary.json", "draws.csv", "diagnostics.json", "fit.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_threads_do_not_change_results(tmp_path, capsys):
    cfg = fast_config(tmp_path, "wk2")
    run(["fit", "--config", cfg, "--out", str(tmp_path / "a")], capsys)
    run(["fit", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "2"], capsys)
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()


def test_seed_precedence(tmp_path, capsys, monkeypatch):
    cfg = fast_config(tmp_path, "heat")
    run(["simulate", "--config", cfg, "--out", str(tmp_path / "cfg")], capsys)
    monkeypatch.setenv(SEED_ENV, "11")
    run(["simulate", "--config", cfg, "--out", str(tmp_path / "env")], capsys)
    run(["simulate", "--config", cfg, "--out", str(tmp_path / "flag"), "--seed", "12"], capsys)
    seeds = {d: io.read_json(tmp_path / d / "truth.json")["seed"] for d in ("cfg", "env", "flag")}
    assert seeds == {"cfg": 0, "env": 11, "flag": 12}
    assert (tmp_path / "cfg" / "u.csv").read_bytes() != (tmp_path / "env" / "u.csv").read_bytes()


def test_large_seed(tmp_path, capsys):
    code, stdout, _ = run(["simulate", "--config", "heat", "--out", str(tmp_path), "--seed", str(2**64 - 1)],
                          capsys)
    assert code == 0 and json.loads(stdout)["seed"] == 2**64 - 1


def test_map_has_point_estimates_only(tmp_path, capsys):
    cfg = fast_config(tmp_path, "wk2", method="map")
    out = tmp_path / "run"
    assert run(["fit", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    summary = io.read_json(out / "summary.json")
    assert summary["method"] == "map"
    for s in summary["params"].values():
        assert set(s) == {"mean"}
    assert (out / "draws.csv").read_text().count("\n") == 1
    assert run(["predict", "--out", str(out)], capsys)[0] == 0
    assert io.read_json(out / "predict.json")["n_draws"] == 1


def test_sparse_fit_and_plugin_prediction(tmp_path, capsys):
    cfg = fast_config(tmp_path, "wk2_vfe_plugin", inducing_maxiter=20)
    out = tmp_path / "run"
    assert run(["fit", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    summary = io.read_json(out / "summary.json")
    assert summary["inducing"] == {"m_u": 8, "m_f": 10}
    assert run(["predict", "--out", str(out)], capsys)[0] == 0
    override = io.read_json(out / "predict.json")["noise_override"]
    assert set(override) == {"sigma_u", "sigma_f"}


def test_report(tmp_path, capsys):
    cfg = fast_config(tmp_path, "wk2_delta")
    a = tmp_path / "a"
    run(["fit", "--config", cfg, "--out", str(a)], capsys)
    code, _, err = run(["report", str(a), "--out", str(tmp_path / "rep")], capsys)
    assert code == 0, err
    rep = io.read_json(tmp_path / "rep" / "report.json")
    assert len(rep["rows"]) == 1
    row = rep["rows"][0]
    assert row["n_params"] == 8 and row["rmse"] is None
    assert set(row["estimates"]) == {"R", "C", "sigma", "ell", "delta.sigma", "delta.ell", "sigma_u", "sigma_f"}
    lines = (tmp_path / "rep" / "report.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].split(",")[-2] == ""
    run(["predict", "--out", str(a)], capsys)
    run(["report", str(a), "--out", str(tmp_path / "rep")], capsys)
    assert io.read_json(tmp_path / "rep" / "report.json")["rows"][0]["rmse"] > 0


def test_report_rejects_bad_bundle(tmp_path, capsys):
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "summary.json").write_text(json.dumps({"method": "exact"}))
    code, _, err = run(["report", str(bad), "--out", str(tmp_path / "rep")], capsys)
    assert code == 2
    msg = json.loads(err)
    assert msg["error"] == "InputError" and str(bad) in msg["message"]


def test_predict_grid_options(tmp_path, capsys):
    cfg = fast_config(tmp_path, "wk2", method="map")
    out = tmp_path / "run"
    run(["fit", "--config", cfg, "--out", str(out)], capsys)
    over = load_preset("wk2")
    over["predict"] = {"grid": {"start": [0.0], "stop": [2.0], "num": [7]}}
    p = tmp_path / "pred.json"
    p.write_text(json.dumps(over))
    with pytest.warns(UserWarning, match="beyond"):
        code, _, err = run(["predict", "--out", str(out), "--config", str(p)], capsys)
    assert code == 0, err
    assert len((out / "predictions.csv").read_text().splitlines()) == 8
    over["predict"] = {"grid": "train"}
    p.write_text(json.dumps(over))
    assert run(["predict", "--out", str(out), "--config", str(p)], capsys)[0] == 0
    rows = np.loadtxt(out / "predictions.csv", delimiter=",", skiprows=1)
    obs = io.read_observations(out)
    # low noise relative to the signal: the mean follows the data closely
    assert np.sqrt(np.mean((rows[:, 1] - obs.y_u) ** 2)) < 2 * 4.0


def test_errors_are_json(tmp_path, capsys):
    code, _, err = run(["fit", "--config", "no_such_preset", "--out", str(tmp_path)], capsys)
    assert code == 2 and json.loads(err)["error"] == "ConfigError"
    code, _, err = run(["predict", "--out", str(tmp_path / "empty")], capsys)
    assert code == 2 and "fit.json" in json.loads(err)["message"]
    code, _, err = run(["fit", "--out", str(tmp_path)], capsys)
    assert code == 2
    code, _, err = run(["simulate", "--config", "heat", "--out", str(tmp_path), "--seed", "-3"], capsys)
    assert code == 2 and json.loads(err)["command"] == "simulate"
    code, _, err = run(["fit", "--config", "heat", "--out", str(tmp_path), "--threads", "0"], capsys)
    assert code == 2


@pytest.mark.parametrize("exc, code", [("sampling", 3), ("bug", 1)])
def test_failure_exit_codes(tmp_path, capsys, monkeypatch, exc, code):
    from pigp import cli
    from pigp.errors import SamplingError

    def boom(*a, **k):
        raise SamplingError("all chains diverged") if exc == "sampling" else RuntimeError("unexpected")

    monkeypatch.setattr(cli, "run_fit", boom)
    got, _, err = run(["fit", "--config", "heat", "--out", str(tmp_path)], capsys)
    assert got == code
    assert json.loads(err)["error"] == ("SamplingError" if exc == "sampling" else "RuntimeError")


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "pigp.cli", "simulate", "--config", "heat", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["n_u"] == 35
    res = subprocess.run([sys.executable, "-m", "pigp.cli", "--help"], capture_output=True, text=True)
    for cmd in ("simulate", "fit", "predict", "report"):
        assert cmd in res.stdout
