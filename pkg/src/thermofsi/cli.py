# -*- coding: utf-8 -*-
"""Deterministic command-line front end.

One entry point dispatches config-driven runs: a single trajectory solve,
an energy audit with bound checks, a stiffness-ladder sweep, the direct
rigid-skeleton limit solve, and a randomized invariant battery.  All
artifacts are text files (CSV or TOML) whose ``#`` header carries the
configuration hash and the package version; reruns from the same
effective configuration produce byte-identical files — no timestamps,
no unseeded randomness, fixed reduction orders.

Configuration is TOML with sections ``[params]``, ``[geometry]``,
``[forcing]``, ``[initial]``, ``[run]``, ``[sweep]``; ``--set
section.key=value`` flags override file keys, and the fully defaulted
effective configuration is echoed next to the artifacts so a run can be
reproduced from its own output directory.

This module imports its numerical siblings inside functions: the
``THERMOFSI_THREADS`` environment variable must reach the BLAS
thread-pool variables before numpy first loads.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, GeometryError, ParameterError, SolverError

_fmt = "{:.17g}".format

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def _apply_thread_env(environ=os.environ) -> None:
    """Copy ``THERMOFSI_THREADS`` into the BLAS pool variables.

    ``setdefault`` keeps explicitly exported pool sizes authoritative.
    Must run before numpy is first imported anywhere in the process.
    """
    value = environ.get("THERMOFSI_THREADS")
    if value is None:
        return
    if not value.isdigit() or int(value) < 1:
        raise ConfigError(
            f"THERMOFSI_THREADS must be a positive integer, got {value!r}")
    for var in _THREAD_VARS:
        environ.setdefault(var, value)


# ---------------------------------------------------------------------------
# configuration schema
# ---------------------------------------------------------------------------

_PARAM_KEYS = ("alpha_tau", "alpha_F", "alpha_nu", "alpha_mu", "alpha_eta",
               "alpha_lambda", "alpha_p", "alpha_theta_s", "alpha_theta_f",
               "c_ps", "c_pf", "kappa_s", "kappa_f", "rho_s", "rho_f")

# key -> expected kind: "int" | "float" | "str" | "float_list"
_SCHEMA = {
    "params": {"preset": "str", **{k: "float" for k in _PARAM_KEYS}},
    "geometry": {"dim": "int", "n": "int", "layout": "str"},
    "forcing": {"body": "str", "magnitude": "float", "axis": "int",
                "envelope": "str", "heat": "str", "center": "float_list",
                "width": "float", "amplitude": "float",
                "heat_envelope": "str"},
    "initial": {"preset": "str", "amplitude": "float"},
    "run": {"mode": "str", "dt": "float", "T": "float", "backend": "str",
            "output_dir": "str", "seed": "int", "count": "int",
            "residual_tol": "float", "quad_points": "int"},
    "sweep": {"mode": "str", "alphas": "float_list", "alpha_p0": "float",
              "alpha_eta0": "float"},
}

_DEFAULTS = {
    "params": {"preset": "reference"},
    "geometry": {"dim": 2, "n": 4, "layout": "slab:2"},
    "forcing": {"body": "zero", "magnitude": 1.0, "axis": -1,
                "envelope": "constant", "heat": "zero", "center": [],
                "width": 0.15, "amplitude": 1.0, "heat_envelope": "constant"},
    "initial": {"preset": "homogeneous", "amplitude": 1.0},
    "run": {"mode": "solve", "dt": 0.02, "T": 0.5, "backend": "direct",
            "output_dir": "out", "seed": 0, "count": 25,
            "residual_tol": 1e-10, "quad_points": 2},
    "sweep": {"mode": "IncompBoth", "alphas": [1e2, 1e3, 1e4, 1e5],
              "alpha_p0": 1.0, "alpha_eta0": 1.0},
}


def _coerce(section: str, key: str, value, kind: str):
    """Check a raw config value against the schema kind, coercing ints."""
    where = f"config key '{section}.{key}'"
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if kind == "float_list":
        if not isinstance(value, (list, tuple)) or any(
                isinstance(v, bool) or not isinstance(v, (int, float))
                for v in value):
            raise ConfigError(
                f"{where}: expected a list of numbers, got {value!r}")
        return [float(v) for v in value]
    raise AssertionError(kind)


def load_config(path) -> dict:
    """Read a TOML config file into a raw section dict."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path!r}: {exc}") from exc


def parse_override(text: str) -> tuple[str, str, object]:
    """Split one ``--set section.key=value`` flag.

    The value is parsed as a TOML literal; anything that does not parse
    (a bare word such as ``gravity``) is kept as a string.
    """
    head, sep, raw_value = text.partition("=")
    section, dot, key = head.strip().partition(".")
    if not sep or not dot or not section or not key.strip():
        raise ConfigError(
            f"override {text!r} must look like section.key=value")
    try:
        value = tomllib.loads(f"v = {raw_value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw_value.strip()
    return section, key.strip(), value


def effective_config(raw: dict, overrides=()) -> dict:
    """Validate and default a raw config into its effective form.

    Unknown sections or keys are rejected naming the offending key.  The
    result contains every known key of every section, so echoing it and
    re-running reproduces the original run exactly.
    """
    merged = {section: dict(values) for section, values in raw.items()}
    for flag in overrides:
        section, key, value = (flag if isinstance(flag, tuple)
                               else parse_override(flag))
        merged.setdefault(section, {})[key] = value
    cfg = {}
    for section, values in merged.items():
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ConfigError(f"unknown config section '{section}'")
        if not isinstance(values, dict):
            raise ConfigError(f"config section '{section}' must be a table")
        out = {}
        for key, value in values.items():
            kind = schema.get(key)
            if kind is None:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            out[key] = _coerce(section, key, value, kind)
        cfg[section] = out
    for section, defaults in _DEFAULTS.items():
        target = cfg.setdefault(section, {})
        for key, value in defaults.items():
            target.setdefault(key, value)
    return cfg


def _canon(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in value) + "]"
    raise ConfigError(f"cannot canonicalize config value {value!r}")


def config_hash(cfg: dict) -> str:
    """SHA-256 over the sorted ``section.key=value`` lines.

    ``run.output_dir`` is excluded: it relocates artifacts without
    changing what is computed, so runs into different directories stay
    byte-identical.
    """
    lines = []
    for section in sorted(cfg):
        for key in sorted(cfg[section]):
            if (section, key) == ("run", "output_dir"):
                continue
            lines.append(f"{section}.{key}={_canon(cfg[section][key])}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _header_lines(cfg: dict) -> tuple[str, ...]:
    return (f"config_sha256={config_hash(cfg)}",
            f"thermofsi_version={__version__}")


def write_config_echo(cfg: dict, path) -> None:
    """Echo the effective configuration as commented TOML."""
    lines = [f"# {line}" for line in _header_lines(cfg)]
    for section in sorted(cfg):
        lines.append("")
        lines.append(f"[{section}]")
        for key in sorted(cfg[section]):
            lines.append(f"{key} = {_toml_value(cfg[section][key])}")
    Path(path).write_text("\n".join(lines) + "\n")


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)  # valid TOML basic string
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")


# ---------------------------------------------------------------------------
# building model objects from the effective config
# ---------------------------------------------------------------------------

def _build_params(cfg: dict):
    from .params import nondimensionalize, reference_physical, validate
    section = cfg["params"]
    if section["preset"] != "reference":
        raise ConfigError(
            f"config key 'params.preset': unknown preset "
            f"{section['preset']!r} (only 'reference' is built in)")
    base = nondimensionalize(reference_physical(),
                             final_time=cfg["run"]["T"])
    explicit = {k: v for k, v in section.items() if k != "preset"}
    params = dataclasses.replace(base, **explicit) if explicit else base
    report = validate(params)
    if not report.ok:
        first = report.failures[0]
        raise ConfigError(f"config key 'params.{first.split(' ')[0]}': {first}")
    return params


def _parse_layout(text: str, dim: int, n: int):
    from .geometry import FluidInclusion, SolidSlab
    parts = str(text).split(":")
    try:
        args = [int(p) for p in parts[1:]]
    except ValueError:
        args = None
    if args is not None and parts[0] == "slab" and len(args) == 1:
        return SolidSlab(index=args[0])
    if args is not None and parts[0] == "inclusion":
        if len(args) == 2:
            return FluidInclusion.central(args[0], args[1], dim)
        if len(args) == 2 * dim:
            bounds = tuple((args[2 * k], args[2 * k + 1]) for k in range(dim))
            return FluidInclusion(bounds=bounds)
    raise ConfigError(
        f"config key 'geometry.layout': cannot parse {text!r} "
        "(use 'slab:<index>' or 'inclusion:<lo>:<hi>' or per-axis "
        "'inclusion:<lo1>:<hi1>:...')")


def _build_geometry(cfg: dict):
    from .geometry import build_geometry
    section = cfg["geometry"]
    dim, n = section["dim"], section["n"]
    if dim not in (1, 2, 3):
        raise ConfigError(f"config key 'geometry.dim': must be 1, 2, or 3, "
                          f"got {dim}")
    if n < 2:
        raise ConfigError(f"config key 'geometry.n': need at least 2 cells "
                          f"per axis, got {n}")
    layout = _parse_layout(section["layout"], dim, n)
    try:
        return build_geometry(dim, n, layout)
    except (GeometryError, ValueError) as exc:
        raise ConfigError(f"config key 'geometry.layout': {exc}") from exc


def _parse_envelope(text: str, key: str):
    from .forcing import Constant, Sine, SmoothRamp
    parts = str(text).split(":")
    try:
        args = [float(p) for p in parts[1:]]
    except ValueError:
        args = None
    if args is not None:
        if parts[0] == "constant" and len(args) == 0:
            return Constant()
        if parts[0] == "constant" and len(args) == 1:
            return Constant(value=args[0])
        if parts[0] == "ramp" and len(args) == 1:
            return SmoothRamp(ramp_time=args[0])
        if parts[0] == "sine" and len(args) == 1:
            return Sine(omega=args[0])
        if parts[0] == "sine" and len(args) == 2:
            return Sine(omega=args[0], amplitude=args[1])
    raise ConfigError(
        f"config key '{key}': cannot parse envelope {text!r} (use "
        "'constant[:value]', 'ramp:<time>', or 'sine:<omega>[:amplitude]')")


def _build_forcing(cfg: dict, dim: int):
    from .forcing import Bump, Forcing, Gravity, ZeroForce, ZeroHeat
    section = cfg["forcing"]
    if section["body"] == "zero":
        body = ZeroForce()
    elif section["body"] == "gravity":
        axis = section["axis"]
        if not -dim <= axis < dim:
            raise ConfigError(
                f"config key 'forcing.axis': {axis} out of range for "
                f"dimension {dim}")
        body = Gravity(magnitude=section["magnitude"], axis=axis,
                       envelope=_parse_envelope(section["envelope"],
                                                "forcing.envelope"))
    else:
        raise ConfigError(
            f"config key 'forcing.body': unknown body force "
            f"{section['body']!r} (use 'zero' or 'gravity')")
    if section["heat"] == "zero":
        heat = ZeroHeat()
    elif section["heat"] == "bump":
        center = tuple(section["center"]) or (0.75,) * dim
        if len(center) != dim:
            raise ConfigError(
                f"config key 'forcing.center': needs {dim} coordinates, "
                f"got {len(center)}")
        heat = Bump(center=center, width=section["width"],
                    amplitude=section["amplitude"],
                    envelope=_parse_envelope(section["heat_envelope"],
                                             "forcing.heat_envelope"))
    else:
        raise ConfigError(
            f"config key 'forcing.heat': unknown heat source "
            f"{section['heat']!r} (use 'zero' or 'bump')")
    return Forcing(body=body, heat=heat)


def _build_initial(cfg: dict, geometry):
    from .forcing import compression_kick, fluid_kick, homogeneous
    section = cfg["initial"]
    preset, amplitude = section["preset"], section["amplitude"]
    if preset == "homogeneous":
        return homogeneous()
    if preset == "compression_kick":
        return compression_kick(geometry.dim, amplitude=amplitude)
    if preset == "fluid_kick":
        return fluid_kick(geometry, amplitude=amplitude)
    raise ConfigError(
        f"config key 'initial.preset': unknown preset {preset!r} (use "
        "'homogeneous', 'compression_kick', or 'fluid_kick')")


def _setup(cfg: dict):
    """Geometry, assembled system, forcing, and initial data from config."""
    from .assembly import assemble_system
    params = _build_params(cfg)
    geometry = _build_geometry(cfg)
    forcing = _build_forcing(cfg, geometry.dim)
    initial = _build_initial(cfg, geometry)
    system = assemble_system(geometry, params,
                             quad_points=cfg["run"]["quad_points"])
    return geometry, params, system, forcing, initial


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _write_checks_csv(checks, path, header_lines=()) -> None:
    """One row per bound check; floats at full precision."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "lhs", "rhs", "margin", "satisfied", "note"])
        for c in checks:
            writer.writerow([c.name, _fmt(c.lhs), _fmt(c.rhs), _fmt(c.margin),
                             "true" if c.satisfied else "false", c.note])


def _print_checks(checks) -> None:
    for c in checks:
        tag = "ok  " if c.satisfied else "FAIL"
        print(f"  [{tag}] {c.name}: lhs={c.lhs:.6g} rhs={c.rhs:.6g}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_solve(cfg: dict, outdir: Path) -> int:
    from .diagnostics import write_norms_csv
    from .integrator import integrate
    run = cfg["run"]
    _geometry, _params, system, forcing, initial = _setup(cfg)
    trajectory = integrate(system, forcing, initial, run["dt"], run["T"],
                           backend=run["backend"],
                           residual_tol=run["residual_tol"],
                           quad_points=run["quad_points"])
    write_norms_csv(trajectory, system, outdir / "norms.csv",
                    header_lines=_header_lines(cfg))
    print(f"solved {trajectory.n_frames} frames -> {outdir / 'norms.csv'}")
    return 0


def _cmd_audit(cfg: dict, outdir: Path) -> int:
    from .diagnostics import (check_energy_estimate, energy_audit, _make_check,
                              write_energy_csv, write_norms_csv)
    from .integrator import integrate
    from .pressures import normalize, reconstruct, write_pressure_csv
    run = cfg["run"]
    geometry, _params, system, forcing, initial = _setup(cfg)
    trajectory = integrate(system, forcing, initial, run["dt"], run["T"],
                           backend=run["backend"],
                           residual_tol=run["residual_tol"],
                           quad_points=run["quad_points"])
    headers = _header_lines(cfg)
    write_norms_csv(trajectory, system, outdir / "norms.csv",
                    header_lines=headers)

    report = energy_audit(trajectory, system, forcing)
    write_energy_csv(report, outdir / "energy.csv", header_lines=headers)

    fields = normalize(reconstruct(trajectory, system), geometry)
    write_pressure_csv(fields, outdir / "pressures.csv", header_lines=headers)

    checks = [
        _make_check("energy_identity_residual",
                    float(abs(report.residual).max()), 1e-8,
                    note="max relative defect of the discrete balance"),
        check_energy_estimate(report, system, forcing),
        _pressure_mean_check(fields),
    ]
    _write_checks_csv(checks, outdir / "checks.csv", header_lines=headers)
    _print_checks(checks)
    return 0 if all(c.satisfied for c in checks) else 4


def _pressure_mean_check(fields):
    """Largest residual domain integral of the normalized pressures.

    Each frame's ``|integral|`` is measured relative to that frame's own
    L2 norm, so the check is scale-free; all-zero frames pass exactly.
    """
    import numpy as np
    from .diagnostics import _make_check
    worst = 0.0
    for tilde in (fields.p_tilde, fields.q_tilde, fields.pi_tilde):
        integral = np.abs(tilde.sum(axis=1)) * fields.cell_volume
        size = np.sqrt((tilde * tilde).sum(axis=1) * fields.cell_volume)
        rel = integral / np.maximum(size, 1e-300)
        worst = max(worst, float(rel.max()))
    return _make_check("pressure_mean_removal", worst, 1e-12,
                       note="largest |domain integral| over the field norm")


def _cmd_sweep(cfg: dict, outdir: Path) -> int:
    from .limits import (SweepPlan, check_pressure_boundedness,
                         check_q_equals_p_limit, run_sweep, write_sweep_csv)
    run = cfg["run"]
    sweep = cfg["sweep"]
    params = _build_params(cfg)
    geometry = _build_geometry(cfg)
    forcing = _build_forcing(cfg, geometry.dim)
    initial = _build_initial(cfg, geometry)
    plan = SweepPlan(mode=sweep["mode"], alphas=tuple(sweep["alphas"]),
                     params=params, geometry=geometry, forcing=forcing,
                     dt=run["dt"], T=run["T"], initial=initial,
                     alpha_p0=sweep["alpha_p0"],
                     alpha_eta0=sweep["alpha_eta0"],
                     quad_points=run["quad_points"])
    report = run_sweep(plan)
    slope_lines = tuple(f"slope_{name}={_fmt(value)}"
                        for name, value in sorted(report.slopes.items()))
    headers = _header_lines(cfg)
    write_sweep_csv(report, outdir / "sweep.csv",
                    header_lines=headers + slope_lines)
    checks = list(report.checks)
    if plan.mode in ("IncompFluid", "IncompBoth") and \
            plan.initial.is_homogeneous:
        checks.append(check_q_equals_p_limit(report))
        checks.append(check_pressure_boundedness(report))
    _write_checks_csv(checks, outdir / "checks.csv", header_lines=headers)
    for name, value in sorted(report.slopes.items()):
        print(f"  slope {name} = {value:.4f}")
    _print_checks(checks)
    return 0 if all(c.satisfied for c in checks) else 4


def _cmd_c2(cfg: dict, outdir: Path) -> int:
    import numpy as np
    from .assembly import assemble_system
    from .limits import c2_residual, solve_c2
    run = cfg["run"]
    sweep = cfg["sweep"]
    params = _build_params(cfg)
    geometry = _build_geometry(cfg)
    forcing = _build_forcing(cfg, geometry.dim)
    solution = solve_c2(geometry, params, forcing, run["dt"], run["T"],
                        alpha_eta0=sweep["alpha_eta0"],
                        quad_points=run["quad_points"])
    residual = c2_residual(solution, geometry, params, forcing,
                           alpha_eta0=sweep["alpha_eta0"],
                           quad_points=run["quad_points"])
    system = assemble_system(geometry, params,
                             quad_points=run["quad_points"])
    probes = system.probes
    M_w = probes.M_w_f + probes.M_w_s
    M_th = probes.M_th_f + probes.M_th_s
    u_norm = np.sqrt(np.maximum(((M_w @ solution.u.T).T
                                 * solution.u).sum(axis=1), 0.0))
    th_norm = np.sqrt(np.maximum(((M_th @ solution.theta.T).T
                                  * solution.theta).sum(axis=1), 0.0))
    p_norm = np.sqrt((solution.p ** 2).sum(axis=1) * geometry.cell_volume)
    headers = _header_lines(cfg) + (f"weak_residual={_fmt(residual)}",)
    with open(outdir / "c2.csv", "w", newline="") as fh:
        for line in headers:
            fh.write(f"# {line}\n")
        fh.write("t,L2_u,L2_theta,L2_p\n")
        for k in range(solution.times.shape[0]):
            fh.write(",".join([_fmt(solution.times[k]), _fmt(u_norm[k]),
                               _fmt(th_norm[k]), _fmt(p_norm[k])]) + "\n")
    print(f"rigid-skeleton solve: weak residual {residual:.3e} "
          f"-> {outdir / 'c2.csv'}")
    return 0


def draw_battery_setup(rng):
    """Draw one randomized valid configuration for the invariant battery.

    Initial data stay homogeneous — the growth-constant estimate is
    checked in the regime its statement assumes — while parameters,
    phase layout, and forcing are randomized.

    Returns
    -------
    dict
        Keys ``label``, ``geometry``, ``params``, ``forcing``, ``dt``, ``T``.
    """
    from .forcing import Bump, Constant, Forcing, Gravity, Sine, \
        SmoothRamp, ZeroForce, ZeroHeat
    from .geometry import FluidInclusion, SolidSlab, build_geometry
    from .params import DimensionlessParams

    dim = int(rng.integers(1, 3))
    n = int(rng.choice((4, 8)))
    if rng.random() < 0.5:
        layout = SolidSlab(index=int(rng.integers(1, n)))
    else:
        layout = FluidInclusion.central(1, n - 1, dim)
    geometry = build_geometry(dim, n, layout)

    def group():
        return float(10.0 ** rng.uniform(-1.0, 1.0))

    T = 0.4
    params = DimensionlessParams(
        alpha_tau=group(), alpha_F=group(), alpha_nu=group(),
        alpha_mu=group(), alpha_eta=group(), alpha_lambda=group(),
        alpha_p=group(), alpha_theta_s=group(), alpha_theta_f=group(),
        c_ps=group(), c_pf=group(), kappa_s=group(), kappa_f=group(),
        rho_s=group(), rho_f=group(), T=T)

    envelopes = (Constant(), SmoothRamp(ramp_time=float(rng.uniform(0.1, 0.3))),
                 Sine(omega=float(rng.uniform(3.0, 9.0))))
    if rng.random() < 0.2:
        body = ZeroForce()
    else:
        body = Gravity(magnitude=float(10.0 ** rng.uniform(-0.5, 0.5)),
                       axis=int(rng.integers(0, dim)),
                       envelope=envelopes[int(rng.integers(0, 3))])
    if rng.random() < 0.2:
        heat = ZeroHeat()
    else:
        heat = Bump(center=tuple(rng.uniform(0.2, 0.8, size=dim)),
                    width=float(rng.uniform(0.1, 0.3)),
                    amplitude=float(10.0 ** rng.uniform(-0.5, 0.5)),
                    envelope=envelopes[int(rng.integers(0, 3))])
    label = f"dim={dim} n={n} " \
            f"{'slab' if isinstance(layout, SolidSlab) else 'inclusion'}"
    return {"label": label, "geometry": geometry, "params": params,
            "forcing": Forcing(body=body, heat=heat), "dt": 0.02, "T": T}


def run_battery(seed: int, count: int):
    """Run the randomized invariant battery; one result dict per draw."""
    import numpy as np
    from .assembly import assemble_system
    from .diagnostics import check_energy_estimate, energy_audit
    from .forcing import homogeneous
    from .integrator import integrate

    rng = np.random.default_rng(seed)
    results = []
    for index in range(count):
        setup = draw_battery_setup(rng)
        system = assemble_system(setup["geometry"], setup["params"])
        diff = (system.B2 - system.A3.T).tocoo()
        b2_gap = float(np.abs(diff.data).max()) if diff.nnz else 0.0
        trajectory = integrate(system, setup["forcing"], homogeneous(),
                               setup["dt"], setup["T"])
        report = energy_audit(trajectory, system, setup["forcing"])
        identity = float(np.abs(report.residual).max())
        estimate = check_energy_estimate(report, system, setup["forcing"])
        results.append({
            "index": index, "label": setup["label"], "b2_gap": b2_gap,
            "identity_residual": identity, "estimate_margin": estimate.margin,
            "ok": (b2_gap <= 1e-12 and identity <= 1e-8
                   and estimate.satisfied),
        })
    return results


def _cmd_selftest(cfg: dict, outdir: Path) -> int:
    run = cfg["run"]
    results = run_battery(run["seed"], run["count"])
    headers = _header_lines(cfg)
    with open(outdir / "selftest.csv", "w", newline="") as fh:
        for line in headers:
            fh.write(f"# {line}\n")
        fh.write("index,label,b2_gap,identity_residual,"
                 "estimate_margin,ok\n")
        for r in results:
            fh.write(",".join([
                str(r["index"]), r["label"].replace(",", ";"),
                _fmt(r["b2_gap"]), _fmt(r["identity_residual"]),
                _fmt(r["estimate_margin"]),
                "true" if r["ok"] else "false"]) + "\n")
    failures = 0
    for r in results:
        tag = "ok  " if r["ok"] else "FAIL"
        failures += not r["ok"]
        print(f"  [{tag}] config {r['index']:02d} ({r['label']}): "
              f"identity={r['identity_residual']:.2e} "
              f"b2={r['b2_gap']:.2e} "
              f"estimate_margin={r['estimate_margin']:.3g}")
    print(f"battery: {len(results) - failures}/{len(results)} passed")
    return 0 if failures == 0 else 4


_COMMANDS = {
    "solve": _cmd_solve,
    "audit": _cmd_audit,
    "sweep": _cmd_sweep,
    "c2": _cmd_c2,
    "selftest": _cmd_selftest,
}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def run(config_path, overrides=(), mode=None, output_dir=None) -> int:
    """Execute one configured run and write its artifacts.

    Parameters
    ----------
    config_path : str or None
        TOML configuration file; ``None`` runs on pure defaults (useful
        only for ``selftest``).
    overrides : iterable of str
        ``section.key=value`` flags applied on top of the file.
    mode : str, optional
        Subcommand to execute; defaults to the config's ``run.mode``
        (``sweep:<mode>`` selects the sweep mode in one token).
    output_dir : str, optional
        Overrides ``run.output_dir``.

    Returns
    -------
    int
        Exit status: 0 on success, 4 if a bound check failed.  Config
        and solver errors are raised (`ConfigError`, `SolverError`) and
        mapped to exit codes 2 and 3 by :func:`main`.
    """
    raw = load_config(config_path) if config_path is not None else {}
    cfg = effective_config(raw, overrides)
    if mode is None:
        mode = cfg["run"]["mode"]
    if mode.startswith("sweep:"):
        cfg["sweep"]["mode"] = mode.split(":", 1)[1]
        mode = "sweep"
    if mode not in _COMMANDS:
        raise ConfigError(
            f"config key 'run.mode': unknown mode {mode!r} "
            f"(use one of {', '.join(sorted(_COMMANDS))})")
    cfg["run"]["mode"] = mode
    if output_dir is not None:
        cfg["run"]["output_dir"] = str(output_dir)
    outdir = Path(cfg["run"]["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    write_config_echo(cfg, outdir / "config_echo.toml")
    return _COMMANDS[mode](cfg, outdir)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermofsi",
        description="Galerkin solver and verification lab for a coupled "
                    "thermoelastic-solid / viscous-thermofluid medium.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("solve", "integrate one trajectory and write its norm series"),
        ("audit", "solve, then write energy budget, pressures, and "
                  "bound checks (exit 4 on violation)"),
        ("sweep", "run a stiffness ladder and write per-rung norms, "
                  "gaps, and decay slopes"),
        ("c2", "solve the rigid-skeleton limit directly and report the "
               "weak-form residual"),
        ("selftest", "run the randomized invariant battery "
                     "(exit 4 on violation)"),
    )
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       required=(name != "selftest"),
                       help="TOML configuration file")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="SECTION.KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--output-dir", default=None,
                       help="artifact directory (default: run.output_dir)")
    return parser


def main(argv=None) -> int:
    """Console entry point mapping failures to documented exit codes."""
    try:
        _apply_thread_env()
        args = _build_parser().parse_args(argv)
        return run(args.config, overrides=args.overrides, mode=args.command,
                   output_dir=args.output_dir)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ParameterError, GeometryError, ValueError) as exc:
        # ConfigError and the model's own rejections subclass ValueError, as
        # do step-size/backend complaints raised inside the integrator.
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
