# -*- coding: utf-8 -*-
"""End-to-end acceptance checks, one verdict line per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible under
``pytest -s``) with the measured quantity and its tolerance, then asserts.
The randomized battery is shared between the identity, estimate, and
coupling-gap checks so the whole module stays within its time budget.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from thermofsi import cli
from thermofsi.assembly import assemble_system
from thermofsi.diagnostics import self_convergence_ratio
from thermofsi.forcing import (Bump, Constant, Forcing, ForcingOperator,
                               Gravity, SmoothRamp, compression_kick,
                               homogeneous)
from thermofsi.geometry import FluidInclusion, SolidSlab, build_geometry
from thermofsi.integrator import State, integrate
from thermofsi.limits import SweepPlan, run_sweep
from thermofsi.params import DimensionlessParams
from thermofsi.pressures import normalize, reconstruct

import oracles

MILD = DimensionlessParams(
    alpha_tau=1.0, alpha_F=1.0, alpha_nu=0.3, alpha_mu=0.2, alpha_eta=2.0,
    alpha_lambda=3.0, alpha_p=1.5, alpha_theta_s=0.7, alpha_theta_f=0.9,
    c_ps=1.1, c_pf=0.8, kappa_s=0.6, kappa_f=0.4, rho_s=2.0, rho_f=1.0)

LADDER = (1e2, 1e3, 1e4, 1e5)

FULL_FORCING = Forcing(
    body=Gravity(magnitude=1.0, envelope=SmoothRamp(0.1)),
    heat=Bump(center=(0.6, 0.6), width=0.2, envelope=Constant(0.8)))


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def battery():
    """Fifty randomized valid configurations, solved and audited once."""
    start = time.perf_counter()
    results = cli.run_battery(seed=42, count=50)
    elapsed = time.perf_counter() - start
    return results, elapsed


def test_battery_energy_identity(battery):
    results, elapsed = battery
    worst = max(r["identity_residual"] for r in results)
    ok = worst <= 1e-8 and elapsed <= 300.0
    _verdict("energy identity battery", ok,
             f"max residual {worst:.3e} over {len(results)} draws "
             f"in {elapsed:.1f}s (tol 1e-08, budget 300s)")


def test_battery_energy_estimate(battery):
    results, _ = battery
    violations = sum(1 for r in results if r["estimate_margin"] < 0.0)
    worst = min(r["estimate_margin"] for r in results)
    _verdict("energy estimate battery", violations == 0,
             f"{violations} violations over {len(results)} draws "
             f"(smallest margin {worst:.3e})")


def test_zero_data_triviality():
    geometry = build_geometry(2, 4, SolidSlab(index=2))
    system = assemble_system(geometry, MILD)
    trajectory = integrate(system, Forcing(), homogeneous(), dt=0.02, T=0.4)
    sup = max(np.abs(trajectory.a).max(), np.abs(trajectory.c).max(),
              np.abs(trajectory.b).max())
    _verdict("zero data triviality", sup <= 1e-12,
             f"max state norm {sup:.3e} over [0, 0.4] (tol 1e-12)")


def test_normalized_pressure_means():
    setups = [
        (build_geometry(1, 4, SolidSlab(index=2)),
         Forcing(body=Gravity(magnitude=1.5)), compression_kick(1)),
        (build_geometry(2, 4, SolidSlab(index=2)), FULL_FORCING,
         homogeneous()),
        (build_geometry(2, 4, FluidInclusion.central(1, 3, 2)),
         Forcing(heat=Bump(center=(0.5, 0.5), width=0.25)),
         compression_kick(2)),
    ]
    worst = 0.0
    for geometry, forcing, initial in setups:
        system = assemble_system(geometry, MILD)
        trajectory = integrate(system, forcing, initial, dt=0.02, T=0.2)
        fields = normalize(reconstruct(trajectory, system), geometry)
        # The mean is removed at the raw field's scale, so the raw norm is
        # the honest per-frame yardstick (a constant raw pressure has an
        # exactly-zero normalized target).
        pairs = ((fields.p_tilde, fields.p), (fields.q_tilde, fields.q),
                 (fields.pi_tilde, fields.pi))
        for frames, parent in pairs:
            integrals = np.abs(fields.integral_omega(frames))
            norms = fields.l2_omega(parent)
            gap = integrals - 1e-12 * norms
            worst = max(worst, float(gap.max()))
    _verdict("normalized pressure means", worst <= 0.0,
             f"largest mean excess over 1e-12*norm is {worst:.3e} "
             f"across 3 runs x 3 fields, every frame")


def test_coupling_transpose_gap(battery):
    results, _ = battery
    worst = max(r["b2_gap"] for r in results)
    _verdict("heat coupling transpose gap", worst <= 1e-12,
             f"max |B2 - A3^T| entry {worst:.3e} over "
             f"{len(results)} draws (tol 1e-12)")


def test_incompressibility_rates():
    geometry = build_geometry(2, 4, SolidSlab(index=2))
    plan = SweepPlan(
        mode="IncompBoth", alphas=LADDER, params=MILD, geometry=geometry,
        forcing=Forcing(body=Gravity(magnitude=0.1, envelope=SmoothRamp(0.1))),
        initial=compression_kick(2), dt=2e-4, T=0.3)
    start = time.perf_counter()
    report = run_sweep(plan)
    elapsed = time.perf_counter() - start
    fluid = report.slopes["sup_sq_fluid_div_vs_alpha_p"]
    solid = report.slopes["sup_sq_solid_div_vs_alpha_eta"]
    ok = (-1.1 <= fluid <= -0.9 and -1.1 <= solid <= -0.9
          and elapsed <= 600.0)
    _verdict("incompressibility decay rates", ok,
             f"fluid slope {fluid:.4f}, solid slope {solid:.4f} "
             f"(window [-1.1, -0.9]) in {elapsed:.1f}s (budget 600s)")


def test_solidification_rate():
    geometry = build_geometry(2, 4, SolidSlab(index=2))
    plan = SweepPlan(mode="Solidify", alphas=LADDER, params=MILD,
                     geometry=geometry, forcing=FULL_FORCING,
                     dt=0.01, T=0.4)
    slope = run_sweep(plan).slopes["sup_sq_solid_D_vs_alpha_lambda"]
    _verdict("solidification decay rate", slope <= -0.9,
             f"slope {slope:.4f} on ladder 1e2..1e5 (bound -0.9)")


def test_joint_limit_gap_decrease():
    geometry = build_geometry(2, 4, SolidSlab(index=2))
    plan = SweepPlan(mode="JointSolidify", alphas=(1e1, 1e2, 1e3, 1e4),
                     params=MILD, geometry=geometry, forcing=FULL_FORCING,
                     dt=0.01, T=0.4, alpha_p0=1.5, alpha_eta0=2.0)
    report = run_sweep(plan)
    u_dec = bool((np.diff(report.c2_gap_u) < 0.0).all())
    th_dec = bool((np.diff(report.c2_gap_theta) < 0.0).all())
    _verdict("joint limit gap decrease", u_dec and th_dec,
             f"u gaps {np.array2string(report.c2_gap_u, precision=5)} "
             f"decreasing={u_dec}, theta gaps "
             f"{np.array2string(report.c2_gap_theta, precision=3)} "
             f"decreasing={th_dec} over 4 ladder points")


def test_self_convergence_order():
    setups = [
        (build_geometry(1, 4, SolidSlab(index=2)),
         Forcing(body=Gravity(magnitude=1.5)), compression_kick(1)),
        (build_geometry(2, 4, SolidSlab(index=2)), FULL_FORCING,
         homogeneous()),
        (build_geometry(2, 4, FluidInclusion.central(1, 3, 2)),
         Forcing(heat=Bump(center=(0.5, 0.5), width=0.25)),
         compression_kick(2)),
    ]
    ratios = []
    for geometry, forcing, initial in setups:
        system = assemble_system(geometry, MILD)
        ratios.append(self_convergence_ratio(system, forcing, initial,
                                             dt=0.02, T=0.2))
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    _verdict("self convergence order", ok,
             "ratios " + ", ".join(f"{r:.3f}" for r in ratios)
             + " on 3 fixed configs (window [3.5, 4.5])")


def test_dense_oracle_agreement():
    geometry = build_geometry(1, 2, SolidSlab(index=1))
    system = assemble_system(geometry, MILD)
    forcing = Forcing(
        body=Gravity(magnitude=2.0, envelope=Constant(1.0)),
        heat=Bump(center=(0.5,), width=0.2, envelope=Constant(1.0)))
    operator = ForcingOperator(system, forcing)
    rest = State(a=np.zeros(system.n_w), c=np.zeros(system.n_w),
                 b=np.zeros(system.n_th), t=0.0)
    exact = oracles.expm_final_state(system, operator.F_tilde(0.0),
                                     operator.Psi_tilde(0.0), rest, T=0.1)
    trajectory = integrate(system, forcing, homogeneous(),
                           dt=0.00125, T=0.1)
    final = (trajectory.a[-1], trajectory.c[-1], trajectory.b[-1])
    error = max(np.abs(got - ref).max()
                for got, ref in zip(final, exact))
    _verdict("dense propagator agreement", error <= 1e-6,
             f"max coefficient error {error:.3e} at T=0.1 (tol 1e-06)")
