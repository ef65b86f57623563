import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltasurf.cli import main, parse_config
from deltasurf.exceptions import ConfigError

TORUS = """\
[surface]
name = torus_patch
R = 2
r = 1
orientation = -1

[mesh]
target_h = 0.1

[geometry]
samples = 50

[run]
seed = 5
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_geometry_run_is_deterministic(tmp_path):
    cfg = _write(tmp_path, TORUS)
    assert main(["geometry", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["geometry", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("geometry.csv", "geometry_samples.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert main(["geometry", "--config", cfg, "--out", str(tmp_path / "c"), "--seed", "6"]) == 0
    assert (tmp_path / "a" / "geometry_samples.csv").read_bytes() != (tmp_path / "c" / "geometry_samples.csv").read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["status"] == "ok" and "started" in manifest


def test_geometry_torus_equator_row(tmp_path):
    assert main(["geometry", "--config", _write(tmp_path, TORUS), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "geometry.csv").read_text()
    assert text.startswith("# config_hash=")
    rows = _rows(tmp_path / "geometry.csv")
    assert list(rows[0]) == ["vertex", "x", "y", "z", "K", "M", "W"]
    x, y, z, W = (np.array([float(r[k]) for r in rows]) for k in ("x", "y", "z", "W"))
    equator = (np.abs(z) < 1e-12) & (np.abs(np.hypot(x, y) - 3.0) < 1e-12)
    assert equator.sum() >= 3
    np.testing.assert_allclose(W[equator], -1 / 9, rtol=1e-6)
    assert np.all(W <= 0)


def test_transverse_run(tmp_path):
    cfg = _write(tmp_path, "[surface]\nname = flat_disk\n[transverse]\na = 1\nbetas = 1, 10\n")
    assert main(["transverse", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "transverse.csv")
    assert rows[0]["Lambda1"] == "" and rows[0]["bracket_valid"] == "false"
    lam = float(rows[1]["Lambda1"])
    assert float(rows[1]["bracket_low"]) <= lam <= float(rows[1]["bracket_high"])


def test_surface_modes_run(tmp_path):
    cfg = _write(tmp_path, "[surface]\nname = hemisphere\n[mesh]\ntarget_h = 0.3\n[solver]\ncount = 3\n")
    assert main(["surface-modes", "--config", cfg, "--out", str(tmp_path)]) == 0
    vals = [float(r["eigenvalue"]) for r in _rows(tmp_path / "surface_modes.csv")]
    np.testing.assert_allclose(vals, [2, 6, 6], rtol=2e-2)
    assert len(_rows(tmp_path / "surface_modes_levels.csv")) == 9


def test_bs_solve_run(tmp_path):
    text = "[surface]\nname = sphere\n[solver]\nbem_h = 0.6\nbeta = 8\ncount = 1\ntrace = true\n"
    assert main(["bs-solve", "--config", _write(tmp_path, text), "--out", str(tmp_path)]) == 0
    (row,) = _rows(tmp_path / "bound_states.csv")
    assert -17 < float(row["E_j"]) < -15 and row["trace_defect"] != ""
    dens = _rows(tmp_path / "densities.csv")
    assert list(dens[0]) == ["vertex", "h_1"]


def test_sweep_run_and_jobs(tmp_path):
    text = (
        "[surface]\nname = sphere\n[mesh]\ntarget_h = 0.3\n"
        "[solver]\nhmax = 0.6\ndegree = 4\n[sweep]\nbetas = 8, 16, 32, 64\n"
    )
    cfg = _write(tmp_path, text)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    for name in ("sweep.csv", "bounds.csv", "remainder.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = _rows(tmp_path / "a" / "sweep.csv")
    assert [float(r["beta"]) for r in rows] == [8, 16, 32, 64]
    assert list(rows[0]) == ["beta", "j", "E_j", "shifted", "muD_j", "remainder", "upper_bound", "converged"]


def test_config_error_exit_code(tmp_path, capsys):
    text = "[surface]\nname = hemisphere\n[sweep]\nbetas = 8, 4\n"
    assert main(["sweep", "--config", _write(tmp_path, text), "--out", str(tmp_path)]) == 2
    assert "line 4" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path):
    text = "[surface]\nname = flat_polygon\nvertices = 0 0; 1 0; 2 0\n"
    out = tmp_path / "out"
    assert main(["geometry", "--config", _write(tmp_path, text), "--out", str(out)]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "numerical failure" and "MeshError" in manifest["error"]


@pytest.mark.parametrize(
    "text, line",
    [
        ("[surface]\nname = nowhere\n", 2),
        ("[surface]\nname = flat_disk\n[mesh]\ntarget_h = -1\n", 4),
        ("[surface]\nname = flat_disk\n\n[solver]\ntol = 0\n", 5),
        ("[surface]\nname = flat_disk\n[sweep]\nxi = 5\n", 4),
        ("[surface]\nname = flat_disk\n[mesh]\nspeed = 3\n", 4),
        ("[surface]\nname = flat_disk\n[extras]\n", 3),
        ("[surface]\nname = flat_disk\n[solver]\ncount = many\n", 4),
    ],
)
def test_config_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_config_file(tmp_path):
    assert main(["geometry", "--config", str(tmp_path / "absent.ini")]) == 2


@settings(max_examples=50, deadline=None)
@given(
    h=st.floats(0.01, 1.0),
    levels=st.integers(1, 5),
    betas=st.lists(st.floats(0.5, 500.0), min_size=1, max_size=5, unique=True),
    xi=st.floats(6.0, 20.0),
    seed=st.integers(0, 2**31),
    trace=st.booleans(),
)
def test_config_round_trip(h, levels, betas, xi, seed, trace):
    betas = sorted(betas)
    if any(b - a <= 0 for a, b in zip(betas, betas[1:])):
        return
    text = (
        "[surface]\nname = spherical_cap\npolar_angle = 1.2\n"
        f"[mesh]\ntarget_h = {h!r}\nlevels = {levels}\n"
        f"[solver]\ntrace = {'yes' if trace else 'no'}\n"
        f"[sweep]\nbetas = {', '.join(map(repr, betas))}\nxi = {xi!r}\n"
        f"[run]\nseed = {seed}\n"
    )
    cfg = parse_config(text)
    once = cfg.to_text()
    again = parse_config(once)
    assert again.to_text() == once
    assert again.hash() == cfg.hash()
    assert again.get("sweep", "betas") == betas and again.seed == seed
