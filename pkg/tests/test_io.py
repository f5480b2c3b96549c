"""CSV and JSON round trips, config loading and seed resolution."""

import json
import math

import numpy as np
import pytest

from pigp import io
from pigp.config import MAX_SEED, SEED_ENV, load_config, parse_seed, preset_names, resolve_seed, validate
from pigp.errors import ConfigError, InputError
from pigp.studies import simulate


def test_observations_round_trip_exactly(tmp_path):
    obs, _ = simulate({"kind": "wk2", "R": 1.0, "C": 1.1, "zero_noise_diastole": True}, 3)
    io.write_observations(tmp_path, obs)
    back = io.read_observations(tmp_path)
    for a, b in [(obs.X_u, back.X_u), (obs.y_u, back.y_u), (obs.X_f, back.X_f), (obs.y_f, back.y_f)]:
        assert a.tobytes() == b.tobytes()
    assert list(back.noise_group_f) == list(obs.noise_group_f)


def test_csv_layout(tmp_path):
    obs, _ = simulate({"kind": "heat", "n_u": 35, "n_f": 20}, 0)
    io.write_observations(tmp_path, obs)
    u = (tmp_path / "u.csv").read_text().splitlines()
    f = (tmp_path / "f.csv").read_text().splitlines()
    assert u[0] == "t,x,y,noise_group" and f[0] == "t,x,y"
    assert len(u) == 36 and len(f) == 21
    assert io.read_observations(tmp_path).input_dim == 2


def test_groups_default_when_column_missing(tmp_path):
    (tmp_path / "u.csv").write_text("t,y\n0.0,1.0\n0.5,2.0\n")
    (tmp_path / "f.csv").write_text("t,y,noise_group\n0.0,3.0,zero\n0.5,4.0,0\n")
    obs = io.read_observations(tmp_path)
    assert list(obs.noise_group_u) == ["0", "0"]
    assert list(obs.noise_group_f) == ["zero", "0"]


@pytest.mark.parametrize("u_text, match", [
    ("t,value\n0,1\n", "missing columns"),
    ("t,y\n0,abc\n", "u.csv:2"),
    ("t,y\n0,nan\n", "non-finite"),
])
def test_bad_csv(tmp_path, u_text, match):
    (tmp_path / "u.csv").write_text(u_text)
    (tmp_path / "f.csv").write_text("t,y\n0,1\n")
    with pytest.raises(InputError, match=match):
        io.read_observations(tmp_path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="not found"):
        io.read_observations(tmp_path)


def test_json_cleaning(tmp_path):
    p = tmp_path / "a.json"
    io.write_json(p, {"b": np.float64(1.5), "a": [np.int64(2), math.inf, np.nan], "c": np.bool_(True)})
    text = p.read_text()
    assert json.loads(text) == {"a": [2, None, None], "b": 1.5, "c": True}
    assert text.index('"a"') < text.index('"b"')


def test_table_writes_null_as_empty(tmp_path):
    p = tmp_path / "t.csv"
    io.write_table(p, ["a", "b"], [[0.1, None], ["x", 2]])
    assert p.read_text() == "a,b\n0.1,\nx,2\n"


def test_bad_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{")
    with pytest.raises(InputError, match="invalid JSON"):
        io.read_json(p)


# -- config ---------------------------------------------------------------------------------
def test_presets_validate():
    names = preset_names()
    assert {"wk2", "wk2_delta", "heat", "heat_bias"} <= set(names)
    for n in names:
        cfg = load_config(n)
        assert cfg["model"]["name"] in ("wk2", "wk2_delta", "heat", "heat_bias")


def test_unknown_preset():
    with pytest.raises(ConfigError, match="no preset"):
        load_config("nope")
    with pytest.raises(ConfigError, match="not found"):
        load_config("missing/file.json")


def test_relative_data_path(tmp_path):
    (tmp_path / "data").mkdir()
    cfg = {"model": {"name": "wk2"}, "data": {"path": "data"}}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert load_config(str(p))["data"]["path"] == str(tmp_path / "data")
    cfg["data"]["path"] = "elsewhere"
    p.write_text(json.dumps(cfg))
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(str(p))


def test_path_and_simulator_are_exclusive(tmp_path):
    cfg = {"model": {"name": "wk2"}, "data": {"path": ".", "simulator": {"kind": "wk2", "R": 1, "C": 1}}}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    with pytest.raises(ConfigError):
        load_config(str(p))


def test_schema_error_names_location():
    with pytest.raises(ConfigError, match="model"):
        validate({"model": {"name": "wk9"}, "data": {"path": "."}}, "config", "cfg")


def test_seed_parsing():
    assert parse_seed("18446744073709551615", "s") == MAX_SEED
    for bad in ("-1", str(MAX_SEED + 1), "1.5", "x"):
        with pytest.raises(ConfigError):
            parse_seed(bad, "s")


def test_seed_precedence(monkeypatch):
    cfg = {"seed": 5}
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert resolve_seed({}) == 0
    assert resolve_seed(cfg) == 5
    monkeypatch.setenv(SEED_ENV, "7")
    assert resolve_seed(cfg) == 7
    assert resolve_seed(cfg, "9") == 9
    monkeypatch.setenv(SEED_ENV, "")
    assert resolve_seed(cfg) == 5

