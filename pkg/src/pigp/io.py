"""CSV and JSON reading and writing for observations and results.

CSV files have a header row, ``.`` decimals and inputs before outputs.
Floats are written with ``repr`` so they round-trip exactly and repeated
runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .gp import ObservationSet

INPUT_COLUMNS = {1: ("t",), 2: ("t", "x")}


def _fmt(v) -> str:
    return repr(float(v))


def write_observations(out_dir, obs: ObservationSet) -> dict:
    """Write ``u.csv`` and ``f.csv``; returns their paths.

    ``u.csv`` always carries a ``noise_group`` column; ``f.csv`` only when
    some f observation is outside the default group.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = INPUT_COLUMNS[obs.input_dim]
    paths = {}
    for ch, X, y, g in (("u", obs.X_u, obs.y_u, obs.noise_group_u), ("f", obs.X_f, obs.y_f, obs.noise_group_f)):
        with_group = ch == "u" or any(v != "0" for v in g)
        path = out / f"{ch}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*cols, "y", *(["noise_group"] if with_group else [])])
            for i in range(y.size):
                row = [_fmt(v) for v in X[i]] + [_fmt(y[i])]
                if with_group:
                    row.append(str(g[i]))
                w.writerow(row)
        paths[ch] = str(path)
    return paths


def _read_channel(path: Path, input_dim: int):
    cols = INPUT_COLUMNS[input_dim]
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (*cols, "y") if c not in header]
        if missing:
            raise InputError(f"{path}: missing columns {missing} (have {header})")
        X, y, g = [], [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                X.append([float(row[c]) for c in cols])
                y.append(float(row["y"]))
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
            g.append(row.get("noise_group") or "0")
    X = np.asarray(X, dtype=float).reshape(-1, input_dim)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InputError(f"{path}: non-finite values")
    return X, y, np.asarray(g, dtype=object)


def detect_input_dim(path) -> int:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), [])
    return 2 if "x" in header else 1


def read_observations(data_dir, input_dim: int | None = None) -> ObservationSet:
    """Read ``u.csv`` and ``f.csv`` from ``data_dir``."""
    d = Path(data_dir)
    pu, pf = d / "u.csv", d / "f.csv"
    for p in (pu, pf):
        if not p.is_file():
            raise InputError(f"data file not found: {p}")
    dim = input_dim or detect_input_dim(pu)
    Xu, yu, gu = _read_channel(pu, dim)
    Xf, yf, gf = _read_channel(pf, dim)
    return ObservationSet(Xu, yu, Xf, yf, gu, gf, input_dim=dim)


def _clean(obj):
    """JSON-safe copy: numpy scalars to floats, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (_fmt(v) if isinstance(v, (float, np.floating)) else v) for v in row])
