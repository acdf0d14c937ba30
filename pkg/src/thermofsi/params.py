# -*- coding: utf-8 -*-
"""Material parameters and their reduction to dimensionless groups.

Two parameter containers are used throughout the package:

* :class:`PhysicalParams` — SI material constants of the two-phase medium
  (an elastic heat-conducting skeleton and a compressible viscous fluid),
  together with the reference scales of the problem.
* :class:`DimensionlessParams` — the eleven dimensionless groups that the
  governing system is written in, plus the phase densities, conductivities
  and heat capacities after rescaling.

The adiabatic exponent of the fluid is fixed at ``gamma0 = 7/5`` (diatomic
gas); the reference sound speed is ``c0**2 = gamma0*p0/rho0``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ParameterError

#: adiabatic exponent of the reference gas (diatomic)
GAMMA0 = 7.0 / 5.0


@dataclass(frozen=True)
class PhysicalParams:
    """SI material constants and reference scales.

    Free-energy second derivatives follow the convention that ``c_frho``,
    ``c_frhorho``, ``c_frhotheta`` are the rho-rho-theta derivatives of the
    fluid free energy at the rest state, and ``c_svv`` / ``c_fvv`` are the
    (negative) temperature-temperature derivatives of the solid / fluid
    free energies.
    """

    kappa_s: float          # W/(m*K)   solid thermal conductivity
    kappa_f: float          # W/(m*K)   fluid thermal conductivity
    nu: float               # Pa*s      fluid bulk viscosity
    mu: float               # Pa*s      fluid shear viscosity
    eta: float              # Pa        solid bulk elastic modulus
    lam: float              # Pa        solid shear elastic modulus
    gamma_s: float          # 1/K       solid thermal extension coefficient
    rho_s: float            # kg/m^3    solid rest density
    rho_f: float            # kg/m^3    fluid rest density
    c_frho: float           # J*m^3/kg^2        fluid free energy F_rho
    c_frhorho: float        # J*m^6/kg^3        fluid free energy F_rho,rho
    c_frhotheta: float      # J*m^3/(kg^2*K)    fluid free energy F_rho,theta
    c_svv: float            # J/(kg*K^2)        solid free energy F_theta,theta (< 0)
    c_fvv: float            # J/(kg*K^2)        fluid free energy F_theta,theta (< 0)
    L0: float               # m         domain size
    tau0: float             # s         process time scale
    g: float                # m/s^2     body-force acceleration scale
    p0: float               # Pa        atmospheric pressure
    rho0: float             # kg/m^3    mean air density at 273 K
    theta0: float           # K         temperature increment scale
    theta_star: float       # K         rest-state absolute temperature

    def check(self) -> None:
        """Raise :class:`ParameterError` naming the first violated constraint."""
        positive = (
            "kappa_s", "kappa_f", "mu", "lam", "gamma_s", "rho_s", "rho_f",
            "L0", "tau0", "g", "p0", "rho0", "theta0", "theta_star",
        )
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ParameterError(
                    f"{name} > 0 violated ({name}={getattr(self, name)!r})")
        if not self.nu > (2.0 / 3.0) * self.mu:
            raise ParameterError(
                f"nu > (2/3)*mu violated (nu={self.nu!r}, mu={self.mu!r})")
        if not self.eta > (2.0 / 3.0) * self.lam:
            raise ParameterError(
                f"eta > (2/3)*lam violated (eta={self.eta!r}, lam={self.lam!r})")
        if not self.c_frhotheta > 0.0:
            raise ParameterError(
                f"c_frhotheta > 0 violated (c_frhotheta={self.c_frhotheta!r})")
        if not 2.0 * self.c_frho + self.c_frhorho * self.rho_f > 0.0:
            raise ParameterError(
                "2*c_frho + c_frhorho*rho_f > 0 violated "
                f"(c_frho={self.c_frho!r}, c_frhorho={self.c_frhorho!r}, "
                f"rho_f={self.rho_f!r})")
        if not self.c_svv < 0.0:
            raise ParameterError(f"c_svv < 0 violated (c_svv={self.c_svv!r})")
        if not self.c_fvv < 0.0:
            raise ParameterError(f"c_fvv < 0 violated (c_fvv={self.c_fvv!r})")


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless groups of the coupled system.

    ``rho_s``, ``rho_f`` are the phase densities over ``rho0``; ``kappa_s``,
    ``kappa_f`` and ``c_ps``, ``c_pf`` are the rescaled conductivities and
    heat capacities entering the piecewise coefficient fields.  ``T`` is the
    final time of the process in units of ``tau0``.
    """

    alpha_tau: float        # inertia group
    alpha_F: float          # body-force group
    alpha_nu: float         # fluid bulk viscosity group
    alpha_mu: float         # fluid shear viscosity group
    alpha_eta: float        # solid bulk stiffness group
    alpha_lambda: float     # solid shear stiffness group
    alpha_p: float          # fluid compressibility group
    alpha_theta_s: float    # solid thermomechanical coupling
    alpha_theta_f: float    # fluid thermomechanical coupling
    c_ps: float             # solid heat capacity
    c_pf: float             # fluid heat capacity
    kappa_s: float          # solid conductivity
    kappa_f: float          # fluid conductivity
    rho_s: float            # solid density / rho0
    rho_f: float            # fluid density / rho0
    T: float = 1.0          # final time


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: empty ``failures`` means acceptable."""

    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def nondimensionalize(p: PhysicalParams, final_time: float = 1.0) -> DimensionlessParams:
    """Reduce SI constants to the dimensionless groups of the model.

    Parameters
    ----------
    p : PhysicalParams
        SI constants; constraint-checked before use.
    final_time : float
        Final process time in units of ``p.tau0``.

    Returns
    -------
    DimensionlessParams

    Notes
    -----
    The compressibility group uses the *rescaled* fluid density
    ``rho_f/rho0`` as its last factor, while the squared isothermal sound
    speed ``c**2 = 2*c_frho*rho_f + c_frhorho*rho_f**2`` and both
    thermomechanical groups use the physical ``rho_f``.
    """
    p.check()
    c0_sq = GAMMA0 * p.p0 / p.rho0
    c_sq = 2.0 * p.c_frho * p.rho_f + p.c_frhorho * p.rho_f ** 2
    kappa_scale = p.tau0 * p.theta0 ** 2 / (p.L0 ** 2 * p.p0 * p.theta_star)
    return DimensionlessParams(
        alpha_tau=GAMMA0 * p.L0 ** 2 / (c0_sq * p.tau0 ** 2),
        alpha_F=GAMMA0 * p.g * p.L0 / c0_sq,
        alpha_nu=(p.nu - 2.0 * p.mu / 3.0) / (p.tau0 * p.p0),
        alpha_mu=2.0 * p.mu / (p.tau0 * p.p0),
        alpha_eta=(p.eta - 2.0 * p.lam / 3.0) / p.p0,
        alpha_lambda=2.0 * p.lam / p.p0,
        alpha_p=(GAMMA0 * c_sq / c0_sq) * (p.rho_f / p.rho0),
        alpha_theta_s=p.gamma_s * p.eta * p.theta0 / p.p0,
        alpha_theta_f=p.c_frhotheta * p.rho_f ** 2 * p.theta0 / p.p0,
        c_ps=-p.c_svv * p.rho_s * p.theta0 ** 2 / p.p0,
        c_pf=-p.c_fvv * p.rho_f * p.theta0 ** 2 / p.p0,
        kappa_s=p.kappa_s * kappa_scale,
        kappa_f=p.kappa_f * kappa_scale,
        rho_s=p.rho_s / p.rho0,
        rho_f=p.rho_f / p.rho0,
        T=float(final_time),
    )


def validate(d: DimensionlessParams) -> ValidationReport:
    """Check that every dimensionless group is strictly positive.

    Returns a report rather than raising, so callers can surface all
    violations at once.
    """
    failures = []
    for f in fields(d):
        value = getattr(d, f.name)
        if not value > 0.0:
            failures.append(f"{f.name} > 0 violated ({f.name}={value!r})")
    return ValidationReport(failures=tuple(failures))


def reference_physical() -> PhysicalParams:
    """Air-like fluid in a steel-like skeleton, metre/second scales.

    The free-energy derivatives reproduce an ideal diatomic gas at 293 K:
    ``c_frho = R*theta_star/rho_f``, ``c_frhorho = -R*theta_star/rho_f**2``
    (so ``c**2`` equals the isothermal sound speed squared ``R*theta_star``),
    ``c_frhotheta = R/rho_f``, and ``c_fvv = -c_v/theta_star``.
    """
    rho_f = 1.2           # kg/m^3
    theta_star = 293.0    # K
    r_air = 287.0         # J/(kg*K)
    c_v_air = 718.0       # J/(kg*K)
    c_steel = 466.0       # J/(kg*K)
    return PhysicalParams(
        kappa_s=45.0,
        kappa_f=0.026,
        nu=2.0e-5,
        mu=1.8e-5,
        eta=1.6e11,
        lam=8.0e10,
        gamma_s=3.6e-5,
        rho_s=7850.0,
        rho_f=rho_f,
        c_frho=r_air * theta_star / rho_f,
        c_frhorho=-r_air * theta_star / rho_f ** 2,
        c_frhotheta=r_air / rho_f,
        c_svv=-c_steel / theta_star,
        c_fvv=-c_v_air / theta_star,
        L0=1.0,
        tau0=1.0,
        g=9.81,
        p0=101325.0,
        rho0=1.293,
        theta0=100.0,
        theta_star=theta_star,
    )
