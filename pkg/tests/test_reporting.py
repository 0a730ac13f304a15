import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vortexray.errors import MissingPrerequisite, ValidationError
from vortexray.reporting import (SWEEP_COLUMNS, ResultRecord, RunConfig, canonical_config,
                                 config_hash, emit_figure_data, run_sweep, validate_output,
                                 write_csv)


def test_empty_lists_rejected():
    with pytest.raises(ValidationError):
        RunConfig.sweep([0.25], [])
    with pytest.raises(ValidationError):
        RunConfig.sweep([0.25], None)
    with pytest.raises(ValidationError):
        RunConfig.sweep([0.25], [1])
    with pytest.raises(ValidationError):
        RunConfig.sweep([-0.1], [50])


def test_sweep_failure_becomes_row():
    # q = 1.30 has no ring; the cell fails without aborting the sweep
    rec = run_sweep(RunConfig.sweep([0.25, 1.30], [50]))
    rows = rec.result["rows"]
    assert [r["q"] for r in rows] == [0.25, 1.30]
    assert rows[0]["error"] == "" and rows[1]["error"] == "NoRing"
    assert np.isnan(rows[1]["re_omega"])
    assert rec.result["failures"] == 1


def test_identical_config_identical_bytes(tmp_path):
    cfg = RunConfig.sweep([0.25], [50, 60])
    a = run_sweep(cfg, tmp_path / "a").artifacts[0].read_bytes()
    b = run_sweep(cfg, tmp_path / "b", jobs=2).artifacts[0].read_bytes()
    assert a == b
    assert a.decode("utf-8").splitlines()[0] == ",".join(SWEEP_COLUMNS)


@pytest.mark.slow
def test_sweep_slopes(tmp_path):
    rec = run_sweep(RunConfig.sweep([0.25], [50, 100, 200, 400], [1, 2]), tmp_path)
    assert len(rec.result["rows"]) == 8 and rec.result["failures"] == 0
    assert rec.result["slopes"]["q=0.25,m=1"] <= -0.8
    assert all(r["semicircle_margin"] > 1e-6 for r in rec.result["rows"])
    assert len(rec.artifacts[0].read_text().splitlines()) == 9
    validate_output(rec.to_dict())


def test_csv_format(tmp_path):
    p = write_csv(tmp_path / "x.csv", ["a", "b"], [[0.1, 1 / 3], [np.float64(2.0), None]])
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode("utf-8").splitlines()
    assert lines[1] == "0.10000000000000001,0.33333333333333331"
    assert float(lines[1].split(",")[1]) == 1 / 3
    assert lines[2] == "2,"


@given(st.dictionaries(st.sampled_from("abcdef"), st.integers(-5, 5), max_size=6))
def test_hash_ignores_key_order_and_int_float(d):
    flipped = dict(reversed(list(d.items())))
    as_float = {k: float(v) for k, v in d.items()}
    assert config_hash(d) == config_hash(flipped) == config_hash(as_float)
    assert config_hash({**d, "z": None}) == config_hash(d)


def test_hash_distinguishes_values():
    assert config_hash({"n": [50]}) != config_hash({"n": [51]})
    assert canonical_config({"b": 1.0, "a": [2.5]}) == '{"a":[2.5],"b":1}'


def test_record_validates_against_schema():
    rec = ResultRecord("locate", config_hash({}), result={"omega": 1 + 2j, "x": np.float64(3)})
    d = json.loads(rec.to_json())
    assert d["result"]["omega"] == [1.0, 2.0]
    assert validate_output(d)
    bad = dict(d)
    del bad["config_hash"]
    with pytest.raises(Exception):
        validate_output(bad)


def test_semicircle_figure(tmp_path):
    out = emit_figure_data("semicircle", {"q": 0.25, "n": 100}, tmp_path)
    assert out["summary"]["markers_inside"]
    rows = out["csv"].read_text().splitlines()
    assert rows[0] == "kind,re,im,m"
    assert sum(1 for r in rows if r.startswith("mode")) == 5
    assert "semicircle.csv" in out["script"].read_text()


def test_potential_regimes_positive_imaginary_part(tmp_path, ring):
    n = 400
    out = emit_figure_data("potential_regimes", {"q": 0.25, "n": n}, tmp_path)
    data = np.genfromtxt(out["csv"], delimiter=",", names=True, dtype=None, encoding="utf-8")
    d = np.abs(data["r"] - ring.r0)
    layer = (d >= 4 * n**-0.75) & (d <= 0.25)
    assert layer.sum() > 50
    assert np.all(data["im_k"][layer] > 0)


def test_mode_profile_m2_dip(tmp_path, ring, shoot):
    rep = shoot(100, 2)
    out = emit_figure_data("mode_profile", {"q": 0.25, "n": 100, "m": 2, "report": rep}, tmp_path)
    data = np.genfromtxt(out["csv"], delimiter=",", names=True)
    i0 = np.argmin(np.abs(data["r"] - ring.r0))
    assert data["abs_phi"][i0] < 0.1 * data["abs_phi"].max()
    left = data["abs_phi"][data["r"] < ring.r0].max()
    right = data["abs_phi"][data["r"] > ring.r0].max()
    assert min(left, right) > 0.5 * max(left, right)


def test_figure_prerequisites(tmp_path):
    with pytest.raises(MissingPrerequisite):
        emit_figure_data("mode_profile", {"q": 0.25, "n": 100}, tmp_path)
    with pytest.raises(MissingPrerequisite):
        emit_figure_data("semicircle", {"q": 0.25}, tmp_path)
    with pytest.raises(ValidationError):
        emit_figure_data("bogus", {"q": 0.25, "n": 100}, tmp_path)
