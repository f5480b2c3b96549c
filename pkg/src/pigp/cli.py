"""Command-line front end: ``pigp simulate|fit|predict|report``.

Every subcommand reads one JSON config (``--config``, a path or preset
name) and writes into ``--out``. Failures print a JSON object to stderr
and exit nonzero: 2 for bad configs or inputs, 3 for numerical or
sampling failures, 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import io
from .config import load_config, preset_names, resolve_seed, validate
from .errors import ConfigError, InputError, PIGPError
from .inference import PosteriorDraws, diagnostics
from .runner import (
    FitResult,
    default_grid,
    inference_settings,
    predict_mixture,
    rmse,
    run_fit,
    summarize,
)
from .sparse import InducingSet, plugin_noise
from .studies import build_model, simulate, truth_u

PREDICT_DEFAULTS = {"target": "u", "max_draws": 200, "level": 0.9, "grid": "default", "noise_override": None}


def _out_dir(args, cfg) -> Path:
    out = args.out or (cfg or {}).get("output_dir") or "pigp_out"
    p = Path(out)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output folder {p}: {exc.strerror}") from None
    return p


def _write_checked(path, obj, schema):
    validate(io._clean(obj), schema, f"output {Path(path).name}")
    io.write_json(path, obj)


def _simulate_into(cfg, seed, out):
    block = cfg["data"].get("simulator")
    if block is None:
        raise ConfigError("simulate needs a data.simulator block")
    obs, truth = simulate(block, seed)
    truth = {**truth, "seed": seed}
    io.write_observations(out, obs)
    _write_checked(out / "truth.json", truth, "truth")
    return obs, truth


def _load_data(cfg, seed, out):
    data = cfg["data"]
    if "simulator" in data:
        return _simulate_into(cfg, seed, out)
    obs = io.read_observations(data["path"])
    truth = None
    tp = Path(data["path"]) / "truth.json"
    if tp.is_file():
        truth = io.read_json(tp)
    io.write_observations(out, obs)
    if truth is not None:
        io.write_json(out / "truth.json", truth)
    return obs, truth


# -- simulate ---------------------------------------------------------------------
def cmd_simulate(args) -> dict:
    cfg = load_config(args.config)
    seed = resolve_seed(cfg, args.seed)
    out = _out_dir(args, cfg)
    obs, _ = _simulate_into(cfg, seed, out)
    return {"out": str(out), "n_u": obs.n_u, "n_f": obs.n_f, "seed": seed}


# -- fit ------------------------------------------------------------------------------
def _draws_rows(d: PosteriorDraws):
    chains, iters, _ = d.draws.shape
    for c in range(chains):
        for i in range(iters):
            yield [c, i, float(d.accept_stat[c, i]), int(d.divergent[c, i]), float(d.logp[c, i]),
                   *map(float, d.draws[c, i])]


def _diagnostics_record(d: PosteriorDraws | None) -> dict:
    if d is None:
        return {"rhat": None, "ess": {}, "n_divergent": 0, "divergent_per_chain": [], "mean_accept": None,
                "step_size": [], "step_size_trace": []}
    dg = diagnostics(d)
    return {
        "rhat": dg["rhat"],
        "ess": dg["ess"],
        "n_divergent": d.n_divergent,
        "divergent_per_chain": [int(v) for v in d.divergent.sum(axis=1)],
        "mean_accept": d.mean_accept,
        "step_size": [float(e) for e in d.step_size],
        "step_size_trace": np.asarray(d.step_size_trace).tolist(),
    }


def cmd_fit(args) -> dict:
    cfg = load_config(args.config)
    seed = resolve_seed(cfg, args.seed)
    out = _out_dir(args, cfg)
    obs, truth = _load_data(cfg, seed, out)
    model = build_model(cfg["model"], obs)
    settings = inference_settings(cfg.get("inference"))
    fit = run_fit(model, obs, settings, seed=seed, threads=args.threads)

    summary = summarize(fit)
    summary.update(model=cfg["model"]["name"], kernel=_kernel_name(cfg), seed=seed)
    _write_checked(out / "summary.json", summary, "summary")
    _write_checked(out / "diagnostics.json", _diagnostics_record(fit.draws), "diagnostics")
    header = ["chain", "iter", "accept_stat", "divergent", "logp", *fit.names]
    io.write_table(out / "draws.csv", header, _draws_rows(fit.draws) if fit.draws is not None else [])
    record = {
        "config": cfg,
        "seed": seed,
        "method": fit.method,
        "names": fit.names,
        "map_values": fit.map_values,
        "fixed_noise": fit.fixed_noise,
        "inducing": fit.inducing.as_dict() if fit.inducing is not None else None,
    }
    _write_checked(out / "fit.json", record, "fit")
    _write_checked(out / "timing.json", {"fit_seconds": fit.runtime}, "timing")
    return {"out": str(out), "method": fit.method, "n_params": len(fit.names), "seconds": fit.runtime}


def _kernel_name(cfg) -> str:
    k = cfg["model"].get("kernel")
    if k is None:
        k = "aniso_se" if cfg["model"]["name"].startswith("heat") else "se"
    return k


# -- predict ------------------------------------------------------------------------
def _read_draws(path, names) -> PosteriorDraws | None:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return None
    chains = max(int(r["chain"]) for r in rows) + 1
    arr = np.array([[float(r[n]) for n in names] for r in rows])
    iters = arr.shape[0] // chains
    if iters * chains != arr.shape[0]:
        raise InputError(f"{path}: ragged chains")
    draws = arr.reshape(chains, iters, len(names))
    z = np.zeros((chains, iters))
    return PosteriorDraws(list(names), draws, z, z.astype(bool), np.zeros(chains), np.zeros((chains, 0)), z)


def load_fit(run_dir) -> tuple[FitResult, dict, dict | None]:
    """Rebuild a :class:`FitResult` from the artifacts written by ``fit``."""
    d = Path(run_dir)
    if not (d / "fit.json").is_file():
        raise InputError(f"no fit artifacts in {d} (fit.json missing); run 'pigp fit' first")
    rec = io.read_json(d / "fit.json")
    validate(rec, "fit", f"{d / 'fit.json'}")
    obs = io.read_observations(d)
    truth = io.read_json(d / "truth.json") if (d / "truth.json").is_file() else None
    cfg = rec["config"]
    model = build_model(cfg["model"], obs)
    if rec["fixed_noise"]:
        from dataclasses import replace

        model = replace(model, fixed={**model.fixed, **rec["fixed_noise"]})
    draws = _read_draws(d / "draws.csv", rec["names"])
    Z = InducingSet.from_dict(rec["inducing"]) if rec["inducing"] else None
    fit = FitResult(rec["method"], model, obs, rec["map_values"], draws, Z, rec["fixed_noise"])
    return fit, rec, truth


def _grid(spec, obs, truth, target) -> np.ndarray:
    dim = obs.input_dim
    if spec == "default":
        return default_grid(obs, truth)
    if spec == "train":
        return obs.X_u if target == "u" else obs.X_f
    if isinstance(spec, list):
        X = np.asarray(spec, dtype=float)
        if X.ndim != 2 or X.shape[1] != dim:
            raise ConfigError(f"grid points need {dim} coordinate(s) each")
        return X
    start, stop, num = spec["start"], spec["stop"], spec["num"]
    if not len(start) == len(stop) == len(num) == dim:
        raise ConfigError(f"grid start/stop/num need {dim} entries")
    axes = [np.linspace(a, b, n, endpoint=spec.get("endpoint", True)) for a, b, n in zip(start, stop, num)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _warn_extrapolation(X, obs):
    data = np.vstack([obs.X_u, obs.X_f])
    lo, hi = data.min(axis=0), data.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    if np.any(X < lo - 0.5 * span) or np.any(X > hi + 0.5 * span):
        warnings.warn("prediction grid extends well beyond the observed inputs", stacklevel=2)


def cmd_predict(args) -> dict:
    out = _out_dir(args, None)
    fit, rec, truth = load_fit(out)
    pcfg = {**PREDICT_DEFAULTS, **rec["config"].get("predict", {})}
    if args.config:
        pcfg.update(load_config(args.config).get("predict", {}))
    target = pcfg["target"]
    X = _grid(pcfg["grid"], fit.obs, truth, target)
    _warn_extrapolation(X, fit.obs)
    override = pcfg["noise_override"]
    if override == "plugin":
        override = plugin_noise(fit.obs, seed=rec["seed"])
    t0 = time.perf_counter()
    pred = predict_mixture(fit, X, target=target, max_draws=pcfg["max_draws"], noise_override=override,
                           level=pcfg["level"])
    elapsed = time.perf_counter() - t0
    true_vals = truth_u(truth, X) if (truth and target == "u") else None
    cols = io.INPUT_COLUMNS[fit.obs.input_dim]
    header = [*cols, "mean", "sd", "lower", "upper", *(["truth"] if true_vals is not None else [])]
    rows = []
    for i in range(X.shape[0]):
        row = [*map(float, X[i]), pred["mean"][i], pred["sd"][i], pred["lower"][i], pred["upper"][i]]
        if true_vals is not None:
            row.append(float(true_vals[i]))
        rows.append(row)
    io.write_table(out / "predictions.csv", header, rows)
    err = rmse(pred["mean"], true_vals) if true_vals is not None else None
    record = {"target": target, "n_points": int(X.shape[0]), "n_draws": pred["n_draws"], "level": pcfg["level"],
              "rmse": err, "noise_override": override}
    _write_checked(out / "predict.json", record, "predict")
    tp = out / "timing.json"
    timing = io.read_json(tp) if tp.is_file() else {"fit_seconds": 0.0}
    timing["predict_seconds"] = elapsed
    _write_checked(tp, timing, "timing")
    return {"out": str(out), "rmse": err, "n_points": int(X.shape[0])}


# -- report ---------------------------------------------------------------------------
def _report_row(bundle: Path) -> dict:
    sp = bundle / "summary.json"
    if not sp.is_file():
        raise InputError(f"bundle {bundle}: summary.json missing")
    summary = io.read_json(sp)
    try:
        validate(summary, "summary", f"bundle {bundle}")
    except ConfigError as exc:
        raise InputError(str(exc)) from None
    rmse_val = None
    if (bundle / "predict.json").is_file():
        rmse_val = io.read_json(bundle / "predict.json").get("rmse")
    runtime = None
    if (bundle / "timing.json").is_file():
        runtime = io.read_json(bundle / "timing.json").get("fit_seconds")
    est = {}
    for name, s in summary["params"].items():
        point = s.get("mean")
        est[name] = {"estimate": point, "q05": s.get("q05"), "q95": s.get("q95")}
    return {"bundle": str(bundle), "model": summary["model"], "kernel": summary["kernel"],
            "method": summary["method"], "n_params": summary["n_params"], "estimates": est,
            "rmse": rmse_val, "runtime": runtime}


def cmd_report(args) -> dict:
    if not args.bundles:
        raise InputError("report needs at least one result folder")
    rows = [_report_row(Path(b)) for b in args.bundles]
    out = _out_dir(args, None)
    _write_checked(out / "report.json", {"rows": rows}, "report")
    names = []
    for r in rows:
        names += [n for n in r["estimates"] if n not in names]
    header = ["bundle", "model", "kernel", "method", "n_params"]
    for n in names:
        header += [n, f"{n}_q05", f"{n}_q95"]
    header += ["rmse", "runtime"]
    table = []
    for r in rows:
        line = [r["bundle"], r["model"], r["kernel"], r["method"], r["n_params"]]
        for n in names:
            e = r["estimates"].get(n, {})
            line += [e.get("estimate"), e.get("q05"), e.get("q95")]
        line += [r["rmse"], r["runtime"]]
        table.append(line)
    io.write_table(out / "report.csv", header, table)
    return {"out": str(out), "rows": len(rows)}


# -- entry point ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file or preset name (%s)" % ", ".join(preset_names()))
    common.add_argument("--out", help="output folder (default: config output_dir or ./pigp_out)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for chains")
    common.add_argument("--seed", help="seed in [0, 2**64 - 1]; overrides PIGP_SEED and the config")
    parser = argparse.ArgumentParser(prog="pigp", description="Physics-informed GP calibration.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="write synthetic u.csv, f.csv and truth.json")
    sub.add_parser("fit", parents=[common], help="fit the configured model")
    sub.add_parser("predict", parents=[common], help="posterior predictive band from fit artifacts in --out")
    rep = sub.add_parser("report", parents=[common], help="comparison table over result folders")
    rep.add_argument("bundles", nargs="*", help="result folders written by fit (and predict)")
    return parser


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "predict": cmd_predict, "report": cmd_report}


def _fail(command, exc, code) -> int:
    msg = {"error": type(exc).__name__, "message": str(exc), "command": command}
    print(json.dumps(msg), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        return _fail(args.command, InputError("--threads must be at least 1"), 2)
    if args.command in ("simulate", "fit") and not args.config:
        return _fail(args.command, ConfigError("--config is required"), 2)
    try:
        result = COMMANDS[args.command](args)
    except (ConfigError, InputError) as exc:
        return _fail(args.command, exc, 2)
    except PIGPError as exc:
        return _fail(args.command, exc, 3)
    except OSError as exc:
        return _fail(args.command, exc, 2)
    except Exception as exc:  # noqa: BLE001 - last-resort machine-readable error
        return _fail(args.command, exc, 1)
    print(json.dumps(io._clean(result), sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
