# -*- coding: utf-8 -*-
"""Command-line surface: config handling, artifacts, determinism, exit codes."""

import subprocess
import sys

import pytest

from thermofsi import cli
from thermofsi.errors import ConfigError

MILD_TOML = """
[params]
preset = "reference"
alpha_tau = 1.0
alpha_F = 1.0
alpha_nu = 0.3
alpha_mu = 0.2
alpha_eta = 2.0
alpha_lambda = 3.0
alpha_p = 1.5
alpha_theta_s = 0.7
alpha_theta_f = 0.9
c_ps = 1.1
c_pf = 0.8
kappa_s = 0.6
kappa_f = 0.4
rho_s = 2.0
rho_f = 1.0

[geometry]
dim = 2
n = 4
layout = "slab:2"

[forcing]
body = "gravity"
magnitude = 0.5
envelope = "ramp:0.1"
heat = "bump"
center = [0.6, 0.6]
width = 0.2

[initial]
preset = "compression_kick"

[run]
dt = 0.02
T = 0.2
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(MILD_TOML)
    return path


# ---------------------------------------------------------------------------
# override and config plumbing
# ---------------------------------------------------------------------------

def test_parse_override_literals():
    assert cli.parse_override("run.dt=0.01") == ("run", "dt", 0.01)
    assert cli.parse_override("geometry.n=8") == ("geometry", "n", 8)
    assert cli.parse_override('geometry.layout="slab:1"') == (
        "geometry", "layout", "slab:1")
    # bare words fall back to strings
    assert cli.parse_override("params.preset=reference") == (
        "params", "preset", "reference")
    assert cli.parse_override("sweep.alphas=[10.0, 100.0]") == (
        "sweep", "alphas", [10.0, 100.0])


def test_parse_override_rejects_malformed_flags():
    for bad in ("run.dt", "run=3", ".dt=1", "run.=1"):
        with pytest.raises(ConfigError, match="section.key=value"):
            cli.parse_override(bad)


def test_effective_config_fills_every_default():
    cfg = cli.effective_config({})
    assert cfg["run"]["dt"] == 0.02
    assert cfg["run"]["backend"] == "direct"
    assert cfg["params"]["preset"] == "reference"
    assert cfg["geometry"]["layout"] == "slab:2"
    assert cfg["sweep"]["alphas"] == [1e2, 1e3, 1e4, 1e5]
    for section, keys in cli._DEFAULTS.items():
        for key in keys:
            assert key in cfg[section]


def test_effective_config_rejects_unknown_names():
    with pytest.raises(ConfigError, match="unknown config section 'fluid'"):
        cli.effective_config({"fluid": {}})
    with pytest.raises(ConfigError, match="unknown config key 'run.dtx'"):
        cli.effective_config({"run": {"dtx": 0.1}})


def test_effective_config_type_checks():
    with pytest.raises(ConfigError, match="expected an integer"):
        cli.effective_config({"geometry": {"dim": True}})
    with pytest.raises(ConfigError, match="expected a number"):
        cli.effective_config({"run": {"dt": "fast"}})
    with pytest.raises(ConfigError, match="list of numbers"):
        cli.effective_config({"sweep": {"alphas": [True, 2.0]}})
    cfg = cli.effective_config({"run": {"dt": 1}})
    assert isinstance(cfg["run"]["dt"], float)


def test_overrides_apply_on_top_of_the_file():
    cfg = cli.effective_config({"run": {"dt": 0.1}}, ["run.dt=0.5"])
    assert cfg["run"]["dt"] == 0.5


def test_config_hash_ignores_output_dir_only():
    base = cli.effective_config({})
    moved = cli.effective_config({"run": {"output_dir": "elsewhere"}})
    changed = cli.effective_config({"run": {"dt": 0.01}})
    assert cli.config_hash(base) == cli.config_hash(moved)
    assert cli.config_hash(base) != cli.config_hash(changed)


def test_thread_env_plumbing():
    env = {"THERMOFSI_THREADS": "2", "OMP_NUM_THREADS": "8"}
    cli._apply_thread_env(env)
    assert env["OMP_NUM_THREADS"] == "8"          # explicit export wins
    assert env["OPENBLAS_NUM_THREADS"] == "2"
    assert env["MKL_NUM_THREADS"] == "2"
    cli._apply_thread_env({})  # absent: no-op
    for bad in ("frog", "0", "-3", "2.5"):
        with pytest.raises(ConfigError, match="THERMOFSI_THREADS"):
            cli._apply_thread_env({"THERMOFSI_THREADS": bad})


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def _read(path):
    return path.read_text().splitlines()


def test_default_solve_writes_zero_norms(tmp_path):
    out = tmp_path / "out"
    assert cli.run(None, mode="solve", output_dir=out) == 0
    lines = _read(out / "norms.csv")
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].startswith("# thermofsi_version=")
    assert lines[2].split(",")[0] == "t"
    # zero forcing from rest: every norm column is exactly zero
    for row in lines[3:]:
        assert all(float(v) == 0.0 for v in row.split(",")[1:])
    assert (out / "config_echo.toml").exists()


def test_audit_writes_all_artifacts(config_file, tmp_path, capsys):
    out = tmp_path / "audit"
    code = cli.run(config_file, mode="audit", output_dir=out)
    assert code == 0
    for name in ("norms.csv", "energy.csv", "pressures.csv", "checks.csv",
                 "config_echo.toml"):
        assert (out / name).exists(), name
        first = _read(out / name)[0]
        assert first.startswith("# config_sha256="), name
    checks = _read(out / "checks.csv")
    assert checks[2].split(",")[0] == "name"
    rows = {row.split(",")[0]: row for row in checks[3:]}
    assert set(rows) == {"energy_identity_residual", "energy_estimate",
                         "pressure_mean_removal"}
    assert all(",true," in row for row in rows.values())
    captured = capsys.readouterr()
    assert "[ok  ] energy_identity_residual" in captured.out


def test_reruns_are_byte_identical(config_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cli.run(config_file, mode="audit", output_dir=out1)
    cli.run(config_file, mode="audit", output_dir=out2)
    for name in ("norms.csv", "energy.csv", "pressures.csv", "checks.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    # echoes differ only in their recorded output directory
    e1 = [l for l in _read(out1 / "config_echo.toml")
          if not l.startswith("output_dir")]
    e2 = [l for l in _read(out2 / "config_echo.toml")
          if not l.startswith("output_dir")]
    assert e1 == e2


def test_echo_round_trip_reproduces_the_run(config_file, tmp_path):
    out1 = tmp_path / "first"
    cli.run(config_file, mode="audit", output_dir=out1)
    echo = out1 / "config_echo.toml"
    out2 = tmp_path / "second"
    cli.run(echo, mode="audit", output_dir=out2)
    for name in ("norms.csv", "energy.csv", "pressures.csv", "checks.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_set_flag_changes_the_recorded_hash(config_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cli.run(config_file, mode="solve", output_dir=out1)
    cli.run(config_file, overrides=("run.dt=0.01",), mode="solve",
            output_dir=out2)
    h1 = _read(out1 / "norms.csv")[0]
    h2 = _read(out2 / "norms.csv")[0]
    assert h1.startswith("# config_sha256=") and h1 != h2


def test_sweep_artifacts(config_file, tmp_path, capsys):
    out = tmp_path / "sweep"
    code = cli.run(config_file,
                   overrides=("sweep.alphas=[100.0, 1000.0, 10000.0]",
                              "run.dt=0.005", "forcing.heat=zero"),
                   mode="sweep:IncompBoth", output_dir=out)
    assert code == 0
    lines = _read(out / "sweep.csv")
    slope_lines = [l for l in lines if l.startswith("# slope_")]
    assert len(slope_lines) == 2  # one per squeezed phase in IncompBoth
    for line in slope_lines:
        name, value = line[2:].split("=")
        assert name.startswith("slope_sup_sq_")
        assert float(value) < -0.5
    data = [l for l in lines if not l.startswith("#")]
    assert len(data) == 1 + 3  # header plus one row per rung
    assert (out / "checks.csv").exists()
    out_text = capsys.readouterr().out
    assert "slope sup_sq_fluid_div_vs_alpha_p" in out_text


def test_c2_artifact(config_file, tmp_path):
    out = tmp_path / "c2"
    code = cli.run(config_file, overrides=("initial.preset=homogeneous",),
                   mode="c2", output_dir=out)
    assert code == 0
    lines = _read(out / "c2.csv")
    residual_lines = [l for l in lines if l.startswith("# weak_residual=")]
    assert len(residual_lines) == 1
    assert float(residual_lines[0].split("=")[1]) < 1e-10
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "t,L2_u,L2_theta,L2_p"
    assert len(data) == 1 + 11  # T/dt + 1 frames


def test_selftest_battery(tmp_path, capsys):
    out = tmp_path / "self"
    code = cli.run(None, overrides=("run.count=3", "run.seed=7"),
                   mode="selftest", output_dir=out)
    assert code == 0
    lines = _read(out / "selftest.csv")
    data = [l for l in lines if not l.startswith("#")]
    assert data[0].startswith("index,label,")
    assert len(data) == 1 + 3
    assert all(row.endswith(",true") for row in data[1:])
    assert "battery: 3/3 passed" in capsys.readouterr().out


def test_battery_draws_are_deterministic():
    import numpy as np
    r1 = cli.run_battery(seed=123, count=2)
    r2 = cli.run_battery(seed=123, count=2)
    assert [r["label"] for r in r1] == [r["label"] for r in r2]
    assert [r["identity_residual"] for r in r1] == \
           [r["identity_residual"] for r in r2]
    rng = np.random.default_rng(5)
    setup = cli.draw_battery_setup(rng)
    assert set(setup) == {"label", "geometry", "params", "forcing", "dt", "T"}


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_exit_codes_for_config_errors(config_file, tmp_path, capsys):
    out = str(tmp_path / "x")
    base = ["--config", str(config_file), "--output-dir", out]
    assert cli.main(["solve"] + base + ["--set", "geometry.dim=7"]) == 2
    assert "geometry.dim" in capsys.readouterr().err
    assert cli.main(["solve"] + base + ["--set", "params.alpha_p=0.0"]) == 2
    assert "params.alpha_p" in capsys.readouterr().err
    assert cli.main(["solve"] + base + ["--set", "run.backend=pcg"]) == 2
    assert "unknown backend" in capsys.readouterr().err
    assert cli.main(["solve"] + base + ["--set", "run.dt=0.3"]) == 2
    assert "integer multiple" in capsys.readouterr().err
    missing = ["solve", "--config", str(tmp_path / "nope.toml"),
               "--output-dir", out]
    assert cli.main(missing) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_exit_code_for_solver_failure(config_file, tmp_path, capsys):
    code = cli.main(["solve", "--config", str(config_file),
                     "--output-dir", str(tmp_path / "x"),
                     "--set", "run.backend=gmres",
                     "--set", "run.residual_tol=1e-30"])
    assert code == 3
    err = capsys.readouterr().err
    assert "solver failure" in err and "relative residual" in err


def test_exit_code_for_geometry_gate(config_file, tmp_path, capsys):
    code = cli.main(["c2", "--config", str(config_file),
                     "--output-dir", str(tmp_path / "x"),
                     "--set", "geometry.layout=inclusion:1:3",
                     "--set", "initial.preset=homogeneous"])
    assert code == 2
    assert "rigid support" in capsys.readouterr().err


def test_exit_code_for_failed_bound_check(config_file, tmp_path, monkeypatch):
    # wiring test: force the estimate check to report a violation and make
    # sure audit surfaces it as exit code 4 (an honest run cannot violate
    # the bound, so the failure is injected at the diagnostics seam)
    import thermofsi.diagnostics as diagnostics
    from thermofsi.diagnostics import BoundCheck

    def broken(report, system, forcing):
        return BoundCheck(name="energy_estimate", lhs=2.0, rhs=1.0,
                          margin=-1.0, satisfied=False)

    monkeypatch.setattr(diagnostics, "check_energy_estimate", broken)
    out = tmp_path / "fail"
    code = cli.run(config_file, mode="audit", output_dir=out)
    assert code == 4
    rows = [r for r in _read(out / "checks.csv") if r.startswith("energy_estimate")]
    assert rows and ",false," in rows[0]


def test_console_entry_point_subprocess(config_file, tmp_path):
    out = tmp_path / "sub"
    result = subprocess.run(
        [sys.executable, "-m", "thermofsi.cli", "audit",
         "--config", str(config_file), "--output-dir", str(out)],
        capture_output=True, text=True, timeout=120)
    assert result.returncode == 0, result.stderr
    assert (out / "checks.csv").exists()
    assert "[ok  ]" in result.stdout

    bad = subprocess.run(
        [sys.executable, "-m", "thermofsi.cli", "solve",
         "--config", str(config_file), "--set", "forcing.body=wind",
         "--output-dir", str(out)],
        capture_output=True, text=True, timeout=120)
    assert bad.returncode == 2
    assert "forcing.body" in bad.stderr


def test_run_rejects_unknown_mode(config_file):
    with pytest.raises(ConfigError, match="run.mode"):
        cli.run(config_file, mode="render")
