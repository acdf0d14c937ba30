# -*- coding: utf-8 -*-
"""Stiff-parameter sweeps and the direct solver for the solidified limit.

A sweep re-solves the same mesh/step configuration along a geometric ladder
of one (or several, in the joint mode) stiffness coefficients and measures
how fast the corresponding constraints are enforced:

* ``IncompSolid``   — alpha_eta ladder; solid divergence is squeezed out
* ``IncompFluid``   — alpha_p ladder; fluid divergence is squeezed out
* ``IncompBoth``    — both at once
* ``Solidify``      — alpha_lambda ladder; solid shear deformation dies
* ``JointSolidify`` — alpha_lambda ladder with alpha_p/alpha_lambda and
  alpha_eta/alpha_lambda held fixed; the rescaled solid displacement
  converges to the stationary limit problem solved directly by
  :func:`solve_c2`.

Everything is measured on the same mesh and step size across the ladder, so
differences between rungs are parameter effects, not discretization noise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import (AssembledSystem, LoadAssembler, assemble_system,
                       solid_vector_dofs, with_params)
from .diagnostics import (BoundCheck, _make_check, energy_audit,
                          energy_estimate_series, fit_loglog_slope)
from .errors import GeometryError, ParameterError, SolverError
from .forcing import Forcing, ForcingOperator, InitialData, homogeneous
from .geometry import MediumGeometry
from .integrator import Trajectory, integrate
from .pressures import PressureFields, normalize, reconstruct

__all__ = [
    "SWEEP_MODES", "SweepPlan", "LimitReport", "run_sweep",
    "check_q_equals_p_limit", "check_pressure_boundedness",
    "C2Solution", "solve_c2", "c2_residual", "write_sweep_csv",
]

_fmt = "{:.17g}".format

SWEEP_MODES = ("IncompSolid", "IncompFluid", "IncompBoth",
               "Solidify", "JointSolidify")

#: sweep modes whose limit bounds assume homogeneous initial data
_STRICT_MODES = ("Solidify", "JointSolidify")


@dataclass(frozen=True)
class SweepPlan:
    """One stiffness ladder over a fixed mesh, step size, and forcing.

    ``alphas`` is the swept magnitude (ascending, geometric, the reciprocal
    of the small parameter).  In the joint mode the two compressibility
    coefficients follow the shear ladder through the fixed ratios
    ``alpha_p0`` and ``alpha_eta0``.

    Initial data: the solidification modes require the homogeneous start
    their limit statements assume.  The incompressibility modes additionally
    accept a *velocity-only* initial state (zero displacement and
    temperature); that keeps the growth constant uniform along the ladder
    while injecting the order-one compressional energy that makes the
    predicted decay rate sharp.
    """

    mode: str
    alphas: tuple[float, ...]
    params: object               # DimensionlessParams
    geometry: MediumGeometry
    forcing: Forcing
    dt: float
    T: float
    initial: InitialData = dataclasses.field(default_factory=homogeneous)
    alpha_p0: float = 1.0
    alpha_eta0: float = 1.0
    quad_points: int = 2

    def __post_init__(self):
        if self.mode not in SWEEP_MODES:
            raise ParameterError(
                f"unknown sweep mode {self.mode!r}; choose from {SWEEP_MODES}")
        if len(self.alphas) < 2:
            raise ParameterError("a sweep needs at least two ladder points")
        arr = np.asarray(self.alphas, dtype=float)
        if not (np.all(arr > 0.0) and np.all(np.diff(arr) > 0.0)):
            raise ParameterError("the ladder must be positive and ascending")
        if self.mode in _STRICT_MODES:
            if not self.initial.is_homogeneous:
                raise ParameterError(
                    f"{self.mode} requires homogeneous initial data")
            if not self.geometry.satisfies_rigid_support:
                raise GeometryError(
                    f"{self.mode} requires a solid slab spanning the domain "
                    "(rigid support); inclusion layouts do not qualify")
        else:
            if not self.initial.is_velocity_only:
                raise ParameterError(
                    "incompressibility sweeps allow at most a velocity-only "
                    "initial state (zero displacement and temperature)")
        if self.mode == "JointSolidify":
            if not self.forcing.is_potential:
                raise ParameterError(
                    "JointSolidify requires a potential body force")
            if not (self.alpha_p0 > 0.0 and self.alpha_eta0 > 0.0):
                raise ParameterError(
                    "JointSolidify needs positive alpha_p0 and alpha_eta0")

    def params_at(self, alpha: float):
        """Parameter set at one ladder point."""
        p = self.params
        if self.mode == "IncompSolid":
            return dataclasses.replace(p, alpha_eta=alpha)
        if self.mode == "IncompFluid":
            return dataclasses.replace(p, alpha_p=alpha)
        if self.mode == "IncompBoth":
            return dataclasses.replace(p, alpha_p=alpha, alpha_eta=alpha)
        if self.mode == "Solidify":
            return dataclasses.replace(p, alpha_lambda=alpha)
        return dataclasses.replace(p, alpha_lambda=alpha,
                                   alpha_p=self.alpha_p0 * alpha,
                                   alpha_eta=self.alpha_eta0 * alpha)


@dataclass(frozen=True)
class LimitReport:
    """Per-rung constraint norms, successive gaps, and fitted decay slopes.

    Squared sup-in-time constraint norms are stored because the a-priori
    bounds are stated for squares; every entry is nonnegative.  Gap arrays
    hold one value per successive ladder pair.  The stationary-limit
    comparison columns are only present for the joint mode.
    """

    mode: str
    alphas: np.ndarray
    alpha_p: np.ndarray
    alpha_eta: np.ndarray
    alpha_lambda: np.ndarray
    sup_sq_fluid_div: np.ndarray
    sup_sq_solid_div: np.ndarray
    sup_sq_solid_D: np.ndarray
    sup_sq_solid_w: np.ndarray
    sup_l2_w: np.ndarray
    qp_gap: np.ndarray
    press_sq_Q: np.ndarray
    rate_bound_fluid: np.ndarray
    rate_bound_solid: np.ndarray
    gap_w: np.ndarray
    gap_theta: np.ndarray
    gap_p: np.ndarray
    gap_q: np.ndarray
    gap_pi: np.ndarray
    slopes: dict
    checks: tuple
    c2_gap_u: np.ndarray | None = None
    c2_gap_theta: np.ndarray | None = None
    c2_gap_p: np.ndarray | None = None

    @property
    def epsilons(self) -> np.ndarray:
        return 1.0 / self.alphas


def _quad_form(M, X: np.ndarray) -> np.ndarray:
    return np.einsum("ki,ki->k", X, (M @ X.T).T)


def _l2Q_sq(frames: np.ndarray, form, dt: float) -> float:
    """Squared space-time norm by midpoint rule from stored frames."""
    mid = 0.5 * (frames[:-1] + frames[1:])
    return float(dt * _quad_form(form, mid).sum())


def _l2Q_sq_cells(frames: np.ndarray, cell_volume: float, dt: float) -> float:
    mid = 0.5 * (frames[:-1] + frames[1:])
    return float(dt * cell_volume * (mid ** 2).sum())


def run_sweep(plan: SweepPlan) -> LimitReport:
    """Solve every rung of the ladder and measure the limit behavior.

    Besides the constraint norms and Cauchy gaps, each rung is checked
    against the explicit decay bound  max_t |chi div w|^2 <= 2 C_en(T)/alpha_p
    (and its solid twin), with the growth constant evaluated from that
    rung's own run.
    """
    base = assemble_system(plan.geometry, plan.params_at(plan.alphas[0]),
                           quad_points=plan.quad_points)
    m = len(plan.alphas)
    probes = base.probes
    geometry = plan.geometry

    sup_sq = {"fluid_div": np.empty(m), "solid_div": np.empty(m),
              "solid_D": np.empty(m), "solid_w": np.empty(m)}
    sup_l2_w = np.empty(m)
    qp_gap = np.empty(m)
    press_sq_Q = np.empty(m)
    bound_f = np.empty(m)
    bound_s = np.empty(m)
    ap = np.empty(m)
    ae = np.empty(m)
    al = np.empty(m)

    trajectories: list[Trajectory] = []
    pressure_frames: list[PressureFields] = []
    c2 = None
    if plan.mode == "JointSolidify":
        c2 = solve_c2(geometry, plan.params, plan.forcing, plan.dt, plan.T,
                      alpha_eta0=plan.alpha_eta0,
                      quad_points=plan.quad_points)

    checks: list[BoundCheck] = []
    for i, alpha in enumerate(plan.alphas):
        params_i = plan.params_at(alpha)
        ap[i], ae[i], al[i] = (params_i.alpha_p, params_i.alpha_eta,
                               params_i.alpha_lambda)
        system = with_params(base, params_i)
        op = ForcingOperator(system, plan.forcing, plan.quad_points)
        traj = integrate(system, op, plan.initial, dt=plan.dt, T=plan.T,
                         quad_points=plan.quad_points)
        report = energy_audit(traj, system, op)

        sup_sq["fluid_div"][i] = _quad_form(probes.Dv_f, traj.a).max()
        sup_sq["solid_div"][i] = _quad_form(probes.Dv_s, traj.a).max()
        sup_sq["solid_D"][i] = _quad_form(probes.DD_s, traj.a).max()
        sup_sq["solid_w"][i] = _quad_form(probes.M_w_s, traj.a).max()
        sup_l2_w[i] = np.sqrt(_quad_form(probes.M_w_f + probes.M_w_s,
                                         traj.a).max())

        fields = normalize(reconstruct(traj, system), geometry)
        qp_gap[i] = np.sqrt(_l2Q_sq_cells(fields.q - fields.p,
                                          geometry.cell_volume, plan.dt))
        press_sq_Q[i] = (_l2Q_sq_cells(fields.q_tilde, geometry.cell_volume,
                                       plan.dt)
                         + _l2Q_sq_cells(fields.pi_tilde,
                                         geometry.cell_volume, plan.dt))

        c_en = float(energy_estimate_series(report, system, op)[1][-1])
        bound_f[i] = 2.0 * c_en / params_i.alpha_p
        bound_s[i] = 2.0 * c_en / params_i.alpha_eta
        checks.append(_make_check(
            f"fluid_div_rate_bound[alpha={alpha:g}]",
            sup_sq["fluid_div"][i], bound_f[i]))
        checks.append(_make_check(
            f"solid_div_rate_bound[alpha={alpha:g}]",
            sup_sq["solid_div"][i], bound_s[i]))

        trajectories.append(traj)
        pressure_frames.append(fields)

    # successive Cauchy gaps in the space-time norm
    gap_w = np.empty(m - 1)
    gap_theta = np.empty(m - 1)
    gap_p = np.empty(m - 1)
    gap_q = np.empty(m - 1)
    gap_pi = np.empty(m - 1)
    M_w = probes.M_w_f + probes.M_w_s
    M_th = probes.M_th_f + probes.M_th_s
    for i in range(m - 1):
        da = trajectories[i + 1].a - trajectories[i].a
        db = trajectories[i + 1].b - trajectories[i].b
        gap_w[i] = np.sqrt(_l2Q_sq(da, M_w, plan.dt))
        gap_theta[i] = np.sqrt(_l2Q_sq(db, M_th, plan.dt))
        for name, arr in (("p", gap_p), ("q", gap_q), ("pi", gap_pi)):
            dfield = (getattr(pressure_frames[i + 1], name)
                      - getattr(pressure_frames[i], name))
            arr[i] = np.sqrt(_l2Q_sq_cells(dfield, geometry.cell_volume,
                                           plan.dt))

    c2_gap_u = c2_gap_theta = c2_gap_p = None
    if c2 is not None:
        c2_gap_u = np.empty(m)
        c2_gap_theta = np.empty(m)
        c2_gap_p = np.empty(m)
        chi = geometry.chi
        for i in range(m):
            scaled = al[i] * trajectories[i].a - c2.u
            c2_gap_u[i] = np.sqrt(_l2Q_sq(scaled, probes.M_w_s, plan.dt))
            c2_gap_theta[i] = np.sqrt(_l2Q_sq(trajectories[i].b - c2.theta,
                                              M_th, plan.dt))
            dp = (pressure_frames[i].p - c2.p) * chi
            c2_gap_p[i] = np.sqrt(_l2Q_sq_cells(dp, geometry.cell_volume,
                                                plan.dt))

    slopes = {}
    alphas = np.asarray(plan.alphas, dtype=float)
    if plan.mode in ("IncompFluid", "IncompBoth"):
        slopes["sup_sq_fluid_div_vs_alpha_p"] = fit_loglog_slope(
            ap, np.maximum(sup_sq["fluid_div"], 1e-300))
    if plan.mode in ("IncompSolid", "IncompBoth"):
        slopes["sup_sq_solid_div_vs_alpha_eta"] = fit_loglog_slope(
            ae, np.maximum(sup_sq["solid_div"], 1e-300))
    if plan.mode in ("Solidify", "JointSolidify"):
        slopes["sup_sq_solid_D_vs_alpha_lambda"] = fit_loglog_slope(
            al, np.maximum(sup_sq["solid_D"], 1e-300))

    return LimitReport(
        mode=plan.mode, alphas=alphas, alpha_p=ap, alpha_eta=ae,
        alpha_lambda=al,
        sup_sq_fluid_div=sup_sq["fluid_div"],
        sup_sq_solid_div=sup_sq["solid_div"],
        sup_sq_solid_D=sup_sq["solid_D"],
        sup_sq_solid_w=sup_sq["solid_w"],
        sup_l2_w=sup_l2_w, qp_gap=qp_gap, press_sq_Q=press_sq_Q,
        rate_bound_fluid=bound_f, rate_bound_solid=bound_s,
        gap_w=gap_w, gap_theta=gap_theta, gap_p=gap_p, gap_q=gap_q,
        gap_pi=gap_pi, slopes=slopes, checks=tuple(checks),
        c2_gap_u=c2_gap_u, c2_gap_theta=c2_gap_theta, c2_gap_p=c2_gap_p)


def check_q_equals_p_limit(report: LimitReport) -> BoundCheck:
    """Check that the two fluid pressures merge along an incompressible ladder.

    The gap between them is proportional to the divergence rate, which the
    dissipation bound drives down as the fluid stiffens; for a run started
    from rest the sequence should decrease strictly.

    Raises
    ------
    ParameterError
        For sweeps that do not stiffen the fluid, or ladders with fewer
        than two points.
    """
    if report.mode not in ("IncompBoth", "IncompFluid"):
        raise ParameterError(
            f"q=p holds in the incompressible-fluid limit; mode "
            f"{report.mode!r} does not stiffen the fluid")
    gaps = report.qp_gap
    if gaps.shape[0] < 2:
        raise ParameterError("need at least two ladder points")
    if np.all(gaps == 0.0):
        return _make_check("q_equals_p_limit", 0.0, 1.0,
                           note="all gaps exactly zero")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = gaps[1:] / gaps[:-1]
    worst = float(np.nanmax(ratios))
    return _make_check("q_equals_p_limit", worst, 1.0,
                       note="largest successive gap ratio; decreasing iff < 1")


def check_pressure_boundedness(report: LimitReport,
                               factor: float = 10.0) -> BoundCheck:
    """Proxy for the uniform normalized-pressure bound along a ladder.

    The squared space-time norms of the normalized pressures may wander by
    at most ``factor`` across the ladder; unbounded growth would contradict
    the uniform estimate the normalization exists to realize.
    """
    vals = report.press_sq_Q
    lo = float(vals.min())
    hi = float(vals.max())
    if hi == 0.0:
        return _make_check("pressure_boundedness", 0.0, factor,
                           note="all normalized pressures exactly zero")
    lo = max(lo, 1e-300)
    return _make_check("pressure_boundedness", hi / lo, factor,
                       note="max/min of the squared normalized-pressure "
                            "space-time norms")


# ---------------------------------------------------------------------------
# direct solver for the stationary solidified limit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class C2Solution:
    """Frames of the decoupled limit problem on the shared time grid."""

    times: np.ndarray   # (K+1,)
    u: np.ndarray       # (K+1, n_w)  rescaled solid displacement (zero on fluid dofs)
    theta: np.ndarray   # (K+1, n_th) temperature
    p: np.ndarray       # (K+1, n_cells) hydrostatic fluid pressure per cell
    solid_dofs: np.ndarray


def solve_c2(geometry: MediumGeometry, params, forcing: Forcing, dt: float,
             T: float, alpha_eta0: float = 1.0,
             quad_points: int = 2) -> C2Solution:
    """Solve the decoupled solidified-limit system directly.

    Three stages per the limit model: a standalone heat solve (same basis
    and midpoint scheme, no velocity coupling), the algebraic hydrostatic
    pressure on fluid cells, and one stationary elastic solve per frame for
    the rescaled solid displacement, with the fluid pressure entering as an
    interface traction through the weak form.

    Raises
    ------
    GeometryError
        If the solid does not span the domain (no rigid support).
    ParameterError
        If the body force carries no potential.
    SolverError
        If the elastic block is singular (excluded by rigid support).
    """
    if not geometry.satisfies_rigid_support:
        raise GeometryError(
            "the solidified limit requires a solid slab spanning the domain "
            "(rigid support)")
    if not forcing.is_potential:
        raise ParameterError("the solidified limit requires a potential "
                             "body force")
    system = assemble_system(geometry, params, quad_points=quad_points)
    op = ForcingOperator(system, forcing, quad_points)
    probes = system.probes
    K = int(round(T / dt))
    if K < 1 or abs(K * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(
            f"final time T={T!r} must be an integer multiple of dt={dt!r}")
    times = dt * np.arange(K + 1)

    # stage 1: standalone midpoint heat solve from rest
    B, B1 = system.B, system.B1
    lhs = (B / dt + 0.5 * B1).tocsc()
    rhs_op = (B / dt - 0.5 * B1).tocsr()
    heat_lu = spla.splu(lhs)
    theta = np.zeros((K + 1, system.n_th))
    for k in range(K):
        t_half = (k + 0.5) * dt
        theta[k + 1] = heat_lu.solve(rhs_op @ theta[k] + op.Psi_tilde(t_half))

    # stage 2: hydrostatic fluid pressure (cell averages for comparisons)
    loads = op.loads
    p = np.empty((K + 1, geometry.n_cells))
    wq = loads.wq
    for k in range(K + 1):
        p_qp = _hydrostatic_at_quadrature(system, op, theta[k],
                                          float(times[k]))
        p[k] = (p_qp * wq).sum(axis=1)

    # stage 3: stationary elastic solve per frame on the solid-borne dofs
    dofs = solid_vector_dofs(geometry, system.basis)
    K_el = (probes.DD_s + alpha_eta0 * probes.Dv_s).tocsr()
    K_sub = K_el[dofs][:, dofs].tocsc()
    try:
        el_lu = spla.splu(K_sub)
    except RuntimeError as exc:  # pragma: no cover - excluded by the gate
        raise SolverError(f"singular stationary elastic system: {exc}") from exc
    u = np.zeros((K + 1, system.n_w))
    for k in range(K + 1):
        rhs = _c2_rhs(system, op, theta[k], float(times[k]))
        u[k, dofs] = el_lu.solve(rhs[dofs])
    return C2Solution(times=times, u=u, theta=theta, p=p, solid_dofs=dofs)


def _scalar_at_quadrature(system: AssembledSystem, loads: LoadAssembler,
                          coeffs: np.ndarray) -> np.ndarray:
    """Nodal scalar field sampled at the quadrature points, (n_cells, nq)."""
    maps = system.basis.maps
    dof = maps.interior_of_node[maps.corners]          # (n_cells, ldof)
    corner_vals = np.where(dof >= 0, coeffs[np.maximum(dof, 0)], 0.0)
    return np.einsum("ca,aq->cq", corner_vals, loads.N)


def _hydrostatic_at_quadrature(system: AssembledSystem, op: ForcingOperator,
                               theta_coeffs: np.ndarray, t: float) -> np.ndarray:
    """Pointwise hydrostatic fluid pressure, zero outside the fluid cells."""
    params = system.params
    chi = system.geometry.chi
    th = _scalar_at_quadrature(system, op.loads, theta_coeffs)
    phi = op.potential_values(t)
    return chi[:, None] * (-params.alpha_theta_f * th
                           + params.alpha_F * params.rho_f * phi)


def _c2_rhs(system: AssembledSystem, op: ForcingOperator,
            theta_coeffs: np.ndarray, t: float) -> np.ndarray:
    """Load vector of the stationary elastic weak form at one frame.

    Terms: the pointwise hydrostatic fluid pressure and the thermal stress
    tested against the divergence of the basis, plus the weighted body
    force.  Using the pointwise pressure (not its cell average) is what
    makes rows interior to the fluid cancel exactly in quadrature.
    """
    p_qp = _hydrostatic_at_quadrature(system, op, theta_coeffs, t)
    div_load = op.loads.divergence_load(p_qp)
    thermal = system.A3.T @ theta_coeffs
    body = op.F_tilde(t)
    return div_load + thermal + body


def c2_residual(solution: C2Solution, geometry: MediumGeometry, params,
                forcing: Forcing, alpha_eta0: float = 1.0,
                quad_points: int = 2) -> float:
    """Max-norm weak-form residual of the stationary solve, over all dofs.

    Tests the solved frames against *every* basis function, not only the
    solid-borne ones: rows interior to the fluid must cancel between the
    pressure-divergence term and the body force, which for a linear
    potential they do exactly in quadrature.
    """
    system = assemble_system(geometry, params, quad_points=quad_points)
    op = ForcingOperator(system, forcing, quad_points)
    K_el = (system.probes.DD_s + alpha_eta0 * system.probes.Dv_s).tocsr()
    worst = 0.0
    for k in range(solution.times.shape[0]):
        rhs = _c2_rhs(system, op, solution.theta[k],
                      float(solution.times[k]))
        res = rhs - K_el @ solution.u[k]
        scale = max(float(np.abs(rhs).max()),
                    float(np.abs(K_el @ solution.u[k]).max()), 1e-300)
        worst = max(worst, float(np.abs(res).max()) / scale)
    return worst


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_sweep_csv(report: LimitReport, path, header_lines=()) -> None:
    """Write the per-rung sweep table.

    Gap columns hold the gap between a rung and its predecessor; the first
    rung's gap cells are empty.  Stationary-limit comparison columns are
    empty outside the joint mode.
    """
    names = ["mode", "epsilon", "alpha_p", "alpha_eta", "alpha_lambda",
             "sup_sq_fluid_div", "sup_sq_solid_div", "sup_sq_solid_D",
             "sup_sq_solid_w", "sup_l2_w", "qp_gap", "press_sq_Q",
             "rate_bound_fluid", "rate_bound_solid",
             "gap_w", "gap_theta", "gap_p", "gap_q", "gap_pi",
             "c2_gap_u", "c2_gap_theta", "c2_gap_p"]
    m = report.alphas.shape[0]
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for i in range(m):
            row = [report.mode, _fmt(report.epsilons[i]),
                   _fmt(report.alpha_p[i]), _fmt(report.alpha_eta[i]),
                   _fmt(report.alpha_lambda[i]),
                   _fmt(report.sup_sq_fluid_div[i]),
                   _fmt(report.sup_sq_solid_div[i]),
                   _fmt(report.sup_sq_solid_D[i]),
                   _fmt(report.sup_sq_solid_w[i]),
                   _fmt(report.sup_l2_w[i]), _fmt(report.qp_gap[i]),
                   _fmt(report.press_sq_Q[i]),
                   _fmt(report.rate_bound_fluid[i]),
                   _fmt(report.rate_bound_solid[i])]
            for arr in (report.gap_w, report.gap_theta, report.gap_p,
                        report.gap_q, report.gap_pi):
                row.append(_fmt(arr[i - 1]) if i > 0 else "")
            for arr in (report.c2_gap_u, report.c2_gap_theta,
                        report.c2_gap_p):
                row.append(_fmt(arr[i]) if arr is not None else "")
            fh.write(",".join(row) + "\n")
