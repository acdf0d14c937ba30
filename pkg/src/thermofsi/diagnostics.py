# -*- coding: utf-8 -*-
"""Energy bookkeeping, a-priori bound checks, and named norm series.

Everything here *re-measures* stored trajectories through the assembled
quadratic forms; nothing re-solves.  Cumulative time integrals use the same
midpoint rule as the integrator, which is what lets the discrete energy
identity hold to rounding rather than to discretization order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import AssembledSystem
from .errors import GeometryError, ParameterError
from .forcing import Forcing, ForcingOperator
from .integrator import State, Trajectory, integrate

__all__ = [
    "EnergyReport", "BoundCheck", "energy_audit", "write_energy_csv",
    "energy_estimate_series", "check_energy_estimate",
    "derivative_initial_state", "check_time_derivative_estimate",
    "check_deformation_bounds", "norm_series", "write_norms_csv",
    "fit_loglog_slope", "self_convergence_ratio", "NORM_NAMES",
]

_fmt = "{:.17g}".format

#: tolerance slack used when declaring an inequality satisfied
_CHECK_SLACK = 1e-8


@dataclass(frozen=True)
class EnergyReport:
    """Per-frame energy split plus cumulative dissipation, work and residual."""

    times: np.ndarray           # (K+1,)
    kinetic: np.ndarray         # (K+1,) 1/2 alpha_tau |sqrt(rho) w_t|^2
    solid_shear: np.ndarray     # (K+1,) 1/2 alpha_lambda |(1-chi) D(w)|^2
    solid_compress: np.ndarray  # (K+1,) 1/2 alpha_eta |(1-chi) div w|^2
    fluid_compress: np.ndarray  # (K+1,) 1/2 alpha_p |chi div w|^2
    thermal: np.ndarray         # (K+1,) 1/2 |sqrt(c_p) theta|^2
    diss_nu: np.ndarray         # (K+1,) cumulative alpha_nu |chi div w_t|^2
    diss_mu: np.ndarray         # (K+1,) cumulative alpha_mu |chi D(w_t)|^2
    diss_kappa: np.ndarray      # (K+1,) cumulative |sqrt(kappa) grad theta|^2
    work: np.ndarray            # (K+1,) cumulative forcing work
    residual: np.ndarray        # (K+1,) relative energy-identity defect

    @property
    def total(self) -> np.ndarray:
        return (self.kinetic + self.solid_shear + self.solid_compress
                + self.fluid_compress + self.thermal)

    @property
    def dissipation(self) -> np.ndarray:
        return self.diss_nu + self.diss_mu + self.diss_kappa


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one inequality check: ``lhs <= rhs`` up to relative slack."""

    name: str
    lhs: float
    rhs: float
    margin: float
    satisfied: bool
    note: str = ""


def _make_check(name: str, lhs: float, rhs: float, note: str = "") -> BoundCheck:
    margin = rhs - lhs
    ok = margin >= -_CHECK_SLACK * max(abs(lhs), abs(rhs), 1.0)
    return BoundCheck(name=name, lhs=float(lhs), rhs=float(rhs),
                      margin=float(margin), satisfied=bool(ok), note=note)


def _series_check(name: str, lhs: np.ndarray, rhs: np.ndarray) -> BoundCheck:
    """Check ``lhs_k <= rhs_k`` at every frame.

    Satisfaction requires every frame to pass (with relative slack); the
    reported values come from the tightest nontrivial frame, i.e. the one
    maximizing lhs/rhs, so a satisfied check still shows how much of the
    bound is used.
    """
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
    ok = bool(np.all(rhs - lhs >= -_CHECK_SLACK * scale))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0.0, lhs / np.where(rhs > 0.0, rhs, 1.0),
                         np.where(lhs > 0.0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    margin = float(rhs[worst] - lhs[worst])
    return BoundCheck(name=name, lhs=float(lhs[worst]), rhs=float(rhs[worst]),
                      margin=margin, satisfied=ok,
                      note=f"tightest frame {worst} of {lhs.shape[0]}")


def _quad(M, X: np.ndarray) -> np.ndarray:
    """x_k^T M x_k for every stacked row, vectorized over frames."""
    return np.einsum("ki,ki->k", X, (M @ X.T).T)


def _cumulative(increments: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(increments)])


def _as_operator(system: AssembledSystem, forcing) -> ForcingOperator:
    if isinstance(forcing, ForcingOperator):
        return forcing
    if isinstance(forcing, Forcing):
        return ForcingOperator(system, forcing)
    raise TypeError(f"expected Forcing or ForcingOperator, got {type(forcing)!r}")


def energy_audit(trajectory: Trajectory, system: AssembledSystem,
                 forcing) -> EnergyReport:
    """Measure the discrete energy balance of a stored trajectory.

    The residual column is the relative defect of the exact discrete
    identity  E_k + D_k = E_0 + W_k  and should sit at rounding level for
    any trajectory the integrator produced.

    Parameters
    ----------
    forcing : Forcing or ForcingOperator
        Must be the forcing the trajectory was integrated with, otherwise
        the work column (and hence the residual) is meaningless.
    """
    op = _as_operator(system, forcing)
    p = system.params
    probes = system.probes
    a, c, b = trajectory.a, trajectory.c, trajectory.b
    dt = trajectory.dt

    kinetic = 0.5 * _quad(system.A, c)
    solid_shear = 0.5 * p.alpha_lambda * _quad(probes.DD_s, a)
    solid_compress = 0.5 * p.alpha_eta * _quad(probes.Dv_s, a)
    fluid_compress = 0.5 * p.alpha_p * _quad(probes.Dv_f, a)
    thermal = 0.5 * _quad(system.B, b)

    ch = 0.5 * (c[:-1] + c[1:])
    bh = 0.5 * (b[:-1] + b[1:])
    diss_nu = _cumulative(dt * p.alpha_nu * _quad(probes.Dv_f, ch))
    diss_mu = _cumulative(dt * p.alpha_mu * _quad(probes.DD_f, ch))
    diss_kappa = _cumulative(dt * _quad(system.B1, bh))

    K = trajectory.n_frames - 1
    work_inc = np.empty(K)
    for j in range(K):
        t_half = float(trajectory.times[j]) + 0.5 * dt
        work_inc[j] = op.F_tilde(t_half) @ ch[j] + op.Psi_tilde(t_half) @ bh[j]
    work = _cumulative(dt * work_inc)

    total = kinetic + solid_shear + solid_compress + fluid_compress + thermal
    diss = diss_nu + diss_mu + diss_kappa
    defect = np.abs(total + diss - total[0] - work)
    scale = np.maximum.reduce([
        np.full_like(total, total[0]), total, diss, np.abs(work),
        np.full_like(total, 1e-300)])
    residual = defect / scale

    return EnergyReport(times=trajectory.times, kinetic=kinetic,
                        solid_shear=solid_shear, solid_compress=solid_compress,
                        fluid_compress=fluid_compress, thermal=thermal,
                        diss_nu=diss_nu, diss_mu=diss_mu,
                        diss_kappa=diss_kappa, work=work, residual=residual)


def write_energy_csv(report: EnergyReport, path, header_lines=()) -> None:
    """Write the energy budget CSV (one row per stored frame)."""
    cols = [report.times, report.kinetic, report.solid_shear,
            report.solid_compress, report.fluid_compress, report.thermal,
            report.diss_nu, report.diss_mu, report.diss_kappa,
            report.work, report.residual]
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("t,kinetic,solid_shear,solid_compress,fluid_compress,"
                 "thermal,diss_nu,diss_mu,diss_kappa,work,residual\n")
        for k in range(report.times.shape[0]):
            fh.write(",".join(_fmt(col[k]) for col in cols) + "\n")


# ---------------------------------------------------------------------------
# a-priori energy estimate
# ---------------------------------------------------------------------------

def _forcing_rate(op: ForcingOperator, p, t: float) -> float:
    """Integrand of the forcing contribution to the growth constant."""
    return (p.alpha_F ** 2 / (2.0 * p.alpha_tau)) * op.rho_F_sq(t) \
        + op.Psi_sq(t) / (2.0 * min(p.c_pf, p.c_ps))


def _growth_constant_series(times: np.ndarray, dt: float, rates: np.ndarray,
                            data_velocity_thermal: float,
                            data_elastic: float) -> np.ndarray:
    """Right side of the energy estimate at every frame time.

    The shape is  G(tau) + int_0^tau G(t) e^(tau-t) dt  plus exponentially
    weighted initial-data terms; the inner cumulative integral G and the
    outer one both use the integrator's midpoint rule.
    """
    K = times.shape[0] - 1
    G = _cumulative(dt * rates)                     # G at frame times
    G_mid = G[:-1] + 0.5 * dt * rates               # G at midpoints
    t_mid = times[:-1] + 0.5 * dt
    # int_0^tau_k G(t) e^(tau_k - t) dt = e^(tau_k) * cumsum(G_mid e^(-t_mid) dt)
    weighted = _cumulative(dt * G_mid * np.exp(-t_mid))
    gronwall = np.exp(times) * weighted
    e_tau = np.exp(times)
    return (G + gronwall
            + 0.5 * (e_tau + 1.0) * data_velocity_thermal
            + e_tau * data_elastic)


def energy_estimate_series(report: EnergyReport, system: AssembledSystem,
                           forcing) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the a-priori energy estimate at every stored time.

    The left side sums the running maxima of the five energy components with
    the cumulative dissipation; the right side is the explicit growth
    constant evaluated from the forcing norms and the discrete initial
    energies (initial-data norms taken from the projected state, which can
    only shrink them).
    """
    op = _as_operator(system, forcing)
    p = system.params
    times = report.times
    dt = float(times[1] - times[0]) if times.shape[0] > 1 else 0.0
    lhs = (np.maximum.accumulate(report.kinetic)
           + np.maximum.accumulate(report.solid_shear)
           + np.maximum.accumulate(report.solid_compress)
           + np.maximum.accumulate(report.fluid_compress)
           + np.maximum.accumulate(report.thermal)
           + report.dissipation)
    t_mid = times[:-1] + 0.5 * dt
    rates = np.array([_forcing_rate(op, p, float(t)) for t in t_mid])
    rhs = _growth_constant_series(
        times, dt, rates,
        data_velocity_thermal=2.0 * (report.kinetic[0] + report.thermal[0]),
        data_elastic=(report.solid_shear[0] + report.solid_compress[0]
                      + report.fluid_compress[0]))
    return lhs, rhs


def check_energy_estimate(report: EnergyReport, system: AssembledSystem,
                          forcing) -> BoundCheck:
    """Verify the a-priori energy estimate at every stored time.

    The returned check reports the frame with the smallest margin.
    """
    lhs, rhs = energy_estimate_series(report, system, forcing)
    return _series_check("energy_estimate", lhs, rhs)


# ---------------------------------------------------------------------------
# time-derivative estimate
# ---------------------------------------------------------------------------

def derivative_initial_state(system: AssembledSystem, forcing) -> State:
    """Initial coefficients of the time-differentiated system.

    With homogeneous initial data every spatial operator annihilates the
    state at t = 0, so the initial velocity of the derivative system is the
    density-weighted projection of the initial body force (and likewise the
    heat-capacity-weighted projection of the initial heat source); the
    initial displacement-derivative is zero.
    """
    import scipy.sparse.linalg as spla

    op = _as_operator(system, forcing)
    c0 = spla.splu(system.A.tocsc()).solve(op.F_tilde(0.0))
    b0 = spla.splu(system.B.tocsc()).solve(op.Psi_tilde(0.0))
    return State(a=np.zeros(system.n_w), c=c0, b=b0, t=0.0)


def check_time_derivative_estimate(system: AssembledSystem, forcing,
                                   dt: float, T: float, initial=None,
                                   backend: str = "direct") -> BoundCheck:
    """Integrate the time-differentiated system and check its energy estimate.

    The derivative trajectory solves the same matrices with the
    time-differentiated forcing pair and the induced initial state; its
    growth constant replaces the initial-data terms by the forcing values at
    t = 0, which dominate the projected discrete initial energies.

    Raises
    ------
    ParameterError
        If nonhomogeneous initial data are supplied — the construction of
        the derivative initial state needs the homogeneous start.
    """
    if initial is not None and not initial.is_homogeneous:
        raise ParameterError(
            "the time-derivative estimate requires homogeneous initial data")
    op = _as_operator(system, forcing)
    d_op = op.derivative()
    p = system.params
    start = derivative_initial_state(system, forcing)
    traj = integrate(system, d_op, start, dt=dt, T=T, backend=backend)
    report = energy_audit(traj, system, d_op)

    lhs = (np.maximum.accumulate(report.kinetic)
           + np.maximum.accumulate(report.solid_shear)
           + np.maximum.accumulate(report.solid_compress)
           + np.maximum.accumulate(report.fluid_compress)
           + np.maximum.accumulate(report.thermal)
           + report.dissipation)
    times = report.times
    t_mid = times[:-1] + 0.5 * dt
    rates = np.array([_forcing_rate(d_op, p, float(t)) for t in t_mid])
    bracket0 = (p.alpha_F ** 2 / p.alpha_tau) * op.rho_F_sq(0.0) \
        + op.Psi_sq(0.0) / min(p.c_pf, p.c_ps)
    rhs = _growth_constant_series(times, dt, rates,
                                  data_velocity_thermal=bracket0,
                                  data_elastic=0.0)
    return _series_check("time_derivative_energy_estimate", lhs, rhs)


# ---------------------------------------------------------------------------
# deformation bounds
# ---------------------------------------------------------------------------

def check_deformation_bounds(runs, stability_factor: float = 10.0):
    """Check the uniform shear bound and the stiff-limit stability bound.

    Parameters
    ----------
    runs : sequence of (system, report, forcing)
        One entry per solved configuration, ordered by increasing shear
        stiffness when more than one is given.
    stability_factor : float
        Allowed growth of the measured stiff-limit ratio relative to its
        value at the first configuration.

    Returns
    -------
    list of BoundCheck
        First the shear-energy bound (worst configuration), then — when the
        geometry admits it — the stiff-limit ratio stability check with the
        first configuration's ratio as the reference constant.

    Raises
    ------
    GeometryError
        If the stability bound is evaluated on a geometry whose solid part
        does not span the domain waist (no rigid support).
    ParameterError
        If the body force carries no potential, or the runs did not start
        from rest.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("need at least one run")

    checks = []

    # uniform shear bound: max_t |(1-chi) D(w)|^2 <= C_en(tau)/alpha_lambda
    worst = None
    for system, report, forcing in runs:
        al = system.params.alpha_lambda
        lhs = 2.0 * float(report.solid_shear.max()) / al
        _, rhs_series = energy_estimate_series(report, system, forcing)
        rhs = float(rhs_series[-1]) / al
        if worst is None or (rhs - lhs) < (worst[1] - worst[0]):
            worst = (lhs, rhs)
    checks.append(_make_check("shear_deformation_bound", worst[0], worst[1],
                              note=f"worst of {len(runs)} configurations"))

    # stiff-limit stability: measured ratio may not outgrow its first value
    for system, report, forcing in runs:
        if not system.geometry.satisfies_rigid_support:
            raise GeometryError(
                "the stiff-limit bound requires the solid to span the domain "
                "waist (slab layout); inclusion layouts have no rigid support")
        op = _as_operator(system, forcing)
        if not op.forcing.is_potential:
            raise ParameterError(
                "the stiff-limit bound requires a potential body force")
        start_energy = float(report.total[0])
        if start_energy > 1e-12 * max(1.0, float(report.total.max())):
            raise ParameterError(
                "the stiff-limit bound requires homogeneous initial data")

    ratios = []
    for system, report, forcing in runs:
        op = _as_operator(system, forcing)
        p = system.params
        dt = float(report.times[1] - report.times[0])
        t_mid = report.times[:-1] + 0.5 * dt
        bracket = 0.0
        for t in t_mid:
            bracket += dt * (op.potential_W12_sq(float(t))
                             + op.potential_grad_dt_sq(float(t))
                             + op.Psi_sq(float(t))
                             + op.Psi_dt_sq(float(t)))
        factor = 1.0 + p.alpha_lambda / p.alpha_eta + p.alpha_lambda / p.alpha_p
        lhs = p.alpha_lambda * (
            float(report.kinetic.max())
            + float(report.diss_nu[-1]) + float(report.diss_mu[-1])
            + 0.5 * (float(report.solid_compress.max())
                     + float(report.fluid_compress.max())
                     + float(report.solid_shear.max())))
        denom = factor * bracket
        if denom == 0.0:
            ratios.append(0.0 if lhs == 0.0 else np.inf)
        else:
            ratios.append(lhs / denom)
    reference = ratios[0] if ratios[0] > 0.0 else max(ratios)
    checks.append(_make_check(
        "stiff_limit_ratio_stability", max(ratios),
        stability_factor * reference,
        note=f"reference ratio {reference:.6g} from the first configuration"))
    return checks


# ---------------------------------------------------------------------------
# named norm series
# ---------------------------------------------------------------------------

#: canonical norm names, in CSV column order
NORM_NAMES = ("w", "w_W12", "theta", "grad_theta", "fluid_div_w",
              "solid_div_w", "solid_D_w", "solid_w")


def _norm_form(system: AssembledSystem, name: str):
    probes = system.probes
    if name == "w":
        return probes.M_w_f + probes.M_w_s, "a"
    if name == "w_W12":
        return (probes.M_w_f + probes.M_w_s
                + probes.K_w_f + probes.K_w_s), "a"
    if name == "theta":
        return probes.M_th_f + probes.M_th_s, "b"
    if name == "grad_theta":
        return probes.K_th_f + probes.K_th_s, "b"
    if name == "fluid_div_w":
        return probes.Dv_f, "a"
    if name == "solid_div_w":
        return probes.Dv_s, "a"
    if name == "solid_D_w":
        return probes.DD_s, "a"
    if name == "solid_w":
        return probes.M_w_s, "a"
    raise ValueError(f"unknown norm name {name!r}; choose from {NORM_NAMES}")


def norm_series(trajectory: Trajectory, system: AssembledSystem,
                which=NORM_NAMES) -> dict[str, np.ndarray]:
    """Spatial norms of the stored frames, one series per requested name.

    Raises
    ------
    ValueError
        On an unrecognized norm name.
    """
    out = {}
    for name in which:
        form, slot = _norm_form(system, name)
        X = trajectory.a if slot == "a" else trajectory.b
        out[name] = np.sqrt(np.maximum(_quad(form, X), 0.0))
    return out


def write_norms_csv(trajectory: Trajectory, system: AssembledSystem, path,
                    header_lines=()) -> None:
    """Write per-frame named norms (column order fixed by ``NORM_NAMES``)."""
    series = norm_series(trajectory, system)
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("t," + ",".join(NORM_NAMES) + "\n")
        for k in range(trajectory.n_frames):
            row = [_fmt(trajectory.times[k])]
            row += [_fmt(series[name][k]) for name in NORM_NAMES]
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# small shared numerics
# ---------------------------------------------------------------------------

def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of log10(y) against log10(x).

    This exact closed form — centered products over centered squares — is
    the one downstream plot annotations must reproduce:

        slope = sum((lx - mean(lx)) (ly - mean(ly))) / sum((lx - mean(lx))^2)
    """
    lx = np.log10(np.asarray(x, dtype=float))
    ly = np.log10(np.asarray(y, dtype=float))
    if lx.shape[0] < 2:
        raise ValueError("need at least two points to fit a slope")
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    return float((dx * dy).sum() / (dx * dx).sum())


def self_convergence_ratio(system: AssembledSystem, forcing, initial,
                           dt: float, T: float) -> float:
    """Richardson ratio of final-state errors under step halving.

    Each step size is compared against its own four-times-finer run, so a
    second-order scheme yields a ratio near 4 regardless of the common
    constant in front of dt^2.
    """
    def final_gap(step):
        coarse = integrate(system, forcing, initial, dt=step, T=T)
        fine = integrate(system, forcing, initial, dt=step / 4.0, T=T)
        return max(np.abs(coarse.a[-1] - fine.a[-1]).max(),
                   np.abs(coarse.c[-1] - fine.c[-1]).max(),
                   np.abs(coarse.b[-1] - fine.b[-1]).max())

    return final_gap(dt) / final_gap(dt / 2.0)
