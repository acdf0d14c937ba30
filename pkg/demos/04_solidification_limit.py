# -*- coding: utf-8 -*-
"""
Stiffen the skeleton until it stops deforming
=============================================

Two ladders.  The first scales only the solid shear penalty and checks that
the squared solid deformation decays at least like one over the penalty.
The second scales the shear penalty together with both compression
penalties (their ratios held fixed) and compares each rung against the
rigid-skeleton stationary solution solved directly: scaled displacement,
temperature, and pressure should all march toward it monotonically.
"""
from __future__ import annotations

import numpy as np

from thermofsi import (Bump, Constant, DimensionlessParams, Forcing,
                       Gravity, SmoothRamp, SolidSlab, SweepPlan,
                       build_geometry, c2_residual, run_sweep, solve_c2)

geometry = build_geometry(dim=2, n=4, layout=SolidSlab(index=2))
params = DimensionlessParams(
    alpha_tau=1.0, alpha_F=1.0, alpha_nu=0.3, alpha_mu=0.2, alpha_eta=2.0,
    alpha_lambda=3.0, alpha_p=1.5, alpha_theta_s=0.7, alpha_theta_f=0.9,
    c_ps=1.1, c_pf=0.8, kappa_s=0.6, kappa_f=0.4, rho_s=2.0, rho_f=1.0)
forcing = Forcing(
    body=Gravity(magnitude=1.0, envelope=SmoothRamp(0.1)),
    heat=Bump(center=(0.6, 0.6), width=0.2, envelope=Constant(0.8)))

# --- shear penalty alone -------------------------------------------------
plan = SweepPlan(mode="Solidify", alphas=(1e2, 1e3, 1e4, 1e5),
                 params=params, geometry=geometry, forcing=forcing,
                 dt=0.01, T=0.4)
report = run_sweep(plan)
print("solid deformation vs shear penalty:")
for a, d in zip(report.alphas, report.sup_sq_solid_D):
    print(f"  alpha={a:8.0e}  sup_t |(1-chi) D(w)|^2 = {d:.6e}")
slope = report.slopes["sup_sq_solid_D_vs_alpha_lambda"]
print(f"fitted slope {slope:+.4f} (bound is -1; anything <= -0.9 is decay)")

# --- joint ladder against the stationary limit ---------------------------
plan = SweepPlan(mode="JointSolidify", alphas=(1e1, 1e2, 1e3, 1e4),
                 params=params, geometry=geometry, forcing=forcing,
                 dt=0.01, T=0.4, alpha_p0=1.5, alpha_eta0=2.0)
report = run_sweep(plan)
print("\ndistance to the rigid-skeleton stationary solution:")
print("  alpha      |scaled u - u_lim|   |theta - theta_lim|   |q - p_lim|")
for k, a in enumerate(report.alphas):
    print(f"  {a:8.0e}   {report.c2_gap_u[k]:16.6e}   "
          f"{report.c2_gap_theta[k]:17.6e}   {report.c2_gap_p[k]:11.6e}")
print(f"  u gaps strictly decreasing:     "
      f"{bool((np.diff(report.c2_gap_u) < 0).all())}")
print(f"  theta gaps strictly decreasing: "
      f"{bool((np.diff(report.c2_gap_theta) < 0).all())}")

# The limit solution itself satisfies the stationary weak form.
limit = solve_c2(geometry, params, forcing, dt=0.01, T=0.4, alpha_eta0=2.0)
residual = c2_residual(limit, geometry, params, forcing, alpha_eta0=2.0)
print(f"\nstationary weak-form residual of the limit solve: {residual:.3e}")
