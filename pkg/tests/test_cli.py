import csv
import io
import json
from pathlib import Path

import pytest

from fluxon import PHI0
from fluxon.cli import (
    DISPERSION_HEADER,
    DRIVE_HEADER,
    SPECTRUM_HEADER,
    cmd_analytic,
    cmd_drive,
    cmd_lattice,
    cmd_solve,
    main,
)
from fluxon.config import apply_override, grid_from, load_config
from fluxon.errors import ValidationError
from fluxon.io import config_hash, format_float

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], rows[1:]


def _comments(text):
    return [line[2:] for line in text.splitlines() if line.startswith("# ")]


def test_format_float_round_trips():
    for x in (0.1, 1 / 3, 2.0 ** -1074, 1.7976931348623157e308, -0.0, 6.0468356147980591e22):
        s = format_float(x)
        assert float(s) == x and len(s.replace("-", "").replace(".", "").split("e")[0]) <= 17
    assert format_float(None) == ""


def test_overrides_and_grids():
    config = {}
    apply_override(config, "drive.rho=2.5e11")
    apply_override(config, "lattice.boundary=open")
    assert config == {"drive": {"rho": 2.5e11}, "lattice": {"boundary": "open"}}
    with pytest.raises(ValidationError):
        apply_override(config, "novalue")
    assert grid_from({"start": 1, "stop": 100, "num": 3, "spacing": "log"}, "x") == pytest.approx([1, 10, 100])
    assert grid_from(2.0, "x") == [2.0]
    with pytest.raises(ValidationError):
        grid_from([], "x")
    with pytest.raises(ValidationError):
        grid_from({"start": 1, "stop": 2, "num": 0}, "x")


def test_load_config_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        load_config(str(bad))


def test_analytic_schema_and_provenance():
    config = load_config(str(CONFIGS / "rho_sweep.json"))
    text = cmd_analytic(config)
    header, rows = _table(text)
    assert header == list(SPECTRUM_HEADER)
    assert header[:7] == ["k", "rho", "n_analytic", "n_numeric", "rel_diff", "wronskian_drift", "spread"]
    comments = _comments(text)
    assert comments[0] == "fluxon analytic"
    assert f"config_sha256={config_hash(config)}" in comments
    assert len(rows) == 41
    n = [float(r[2]) for r in rows]
    assert all(b >= a for a, b in zip(n, n[1:]))
    assert abs(n[-1] - 0.0076190476190476) / 0.0076190476190476 < 1e-3
    assert all(r[3] == r[4] == "" for r in rows)


def test_analytic_is_deterministic_and_parallel_safe():
    config = load_config(str(CONFIGS / "rho_sweep.json"))
    serial = cmd_analytic(config)
    assert cmd_analytic(config) == serial
    assert cmd_analytic(config, jobs=4) == serial


def test_analytic_static_and_single_point():
    config = {"model": {"A": 2.0, "B": 0.0}, "k": [0.0, 1.0], "rho": [0.5, 2.0]}
    _, rows = _table(cmd_analytic(config))
    assert [float(r[2]) for r in rows] == [0.0] * 4
    assert [(float(r[0]), float(r[1])) for r in rows] == [(0, 0.5), (0, 2), (1, 0.5), (1, 2)]
    _, rows = _table(cmd_analytic({"model": {"A": 2.5, "B": 1.5}, "k": 0.0, "rho": 1.0}))
    assert len(rows) == 1
    assert float(rows[0][2]) == pytest.approx(0.0017127354360056881, rel=1e-14)


def test_solve_matches_analytic():
    config = load_config(str(CONFIGS / "solve_tanh.json"))
    text, ok = cmd_solve(config)
    assert ok
    _, rows = _table(text)
    assert len(rows) == 9
    for r in rows:
        assert r[7] == "ok"
        assert float(r[4]) < 1e-5
        assert float(r[5]) < 1e-9


def test_solve_flags_failures_without_stopping():
    config = {"model": {"A": 2.5, "B": 1.5}, "k": [0.0], "rho": [1.0, 1e15], "method": "taylor"}
    text, ok = cmd_solve(config)
    assert not ok
    _, rows = _table(text)
    assert rows[0][7] == "ok"
    assert rows[1][7].startswith("StepSizeUnderflow")
    assert rows[1][3] == rows[1][4] == ""


def test_lattice_schema():
    text = cmd_lattice(load_config(str(CONFIGS / "lattice.json")))
    header, rows = _table(text)
    assert header == list(DISPERSION_HEADER)
    assert len(rows) == 100
    assert rows[0][2] == rows[0][3]
    assert all(float(r[2]) <= float(r[3]) for r in rows)


def test_drive_emits_reference_assignment():
    text = cmd_drive(load_config(str(CONFIGS / "drive_reference.json")))
    header, rows = _table(text)
    assert header == list(DRIVE_HEADER) and header[:2] == ["time_s", "flux_ext_Wb"]
    notes = dict(c.split("=", 1) for c in _comments(text) if "=" in c and not c.startswith("config"))
    assert notes["feasible"] == "true"
    assert abs(float(notes["omega_in_rad_s"]) - 0.21e12) < 1e-3
    assert abs(float(notes["omega_out_rad_s"]) - 0.25e12) < 1e-3
    assert float(notes["k_prime_a"]) < 1
    flux = [float(r[1]) for r in rows]
    assert flux[0] == pytest.approx(float(notes["flux_in_Wb"]), rel=1e-12)
    assert abs(flux[-1]) < 1e-6 * PHI0
    assert all(0 <= phi < PHI0 / 2 for phi in flux)
    assert all(b <= a for a, b in zip(flux, flux[1:]))


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "rho_sweep.csv"
    assert main(["analytic", "--config", str(CONFIGS / "rho_sweep.json"), "--out", str(out)]) == 0
    assert out.read_text() == cmd_analytic(load_config(str(CONFIGS / "rho_sweep.json")))
    assert main(["analytic", "--config", str(CONFIGS / "rho_sweep.json"), "--set", "rho=[]"]) == 1
    assert "empty grid" in capsys.readouterr().err
    assert main(["analytic", "--set", "circuit.critical_current=-1"]) == 1
    assert main(["drive", "--config", str(CONFIGS / "drive_reference.json"),
                 "--set", "targets.omega_out=0.2e12"]) == 1
    assert main(["solve", "--set", 'model={"A":2.5,"B":1.5}', "--set", "rho=[1e15]",
                 "--method", "taylor"]) == 2


def test_cli_output_is_byte_identical(tmp_path):
    paths = [tmp_path / f"run{i}.csv" for i in range(3)]
    main(["analytic", "--config", str(CONFIGS / "rho_sweep.json"), "--out", str(paths[0])])
    main(["analytic", "--config", str(CONFIGS / "rho_sweep.json"), "--out", str(paths[1])])
    main(["analytic", "--config", str(CONFIGS / "rho_sweep.json"), "--out", str(paths[2]), "--jobs", "8"])
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]


def test_verify_report_and_failure(tmp_path, capsys):
    out = tmp_path / "report.json"
    subset = '["gamma_reflection","analytic_normalization","step_sudden_numeric"]'
    assert main(["verify", "--set", f"only={subset}", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert [r["invariant_name"] for r in report] == json.loads(subset)
    assert all({"invariant_name", "tolerance", "observed", "pass"} <= set(r) for r in report)
    assert all(r["pass"] for r in report)

    code = main(["verify", "--set", 'only=["step_sudden_numeric"]', "--tol", "1e-2",
                 "--set", "tolerances.step_sudden_numeric=1e-9"])
    assert code == 2
    assert "FAILED step_sudden_numeric" in capsys.readouterr().err
    assert main(["verify", "--set", "numeric_grid.omega_ratio=[]"]) == 1
