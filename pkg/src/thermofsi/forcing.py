# -*- coding: utf-8 -*-
"""Forcing presets, initial-data presets, and their load-vector evaluation.

Presets are analytic in (x, t) with bounded time derivatives, so both the
forcing pair and its time derivative are square integrable on the space-time
cylinder — the regularity the derivative-system diagnostics need.  Presets
built from a fixed spatial profile times a time envelope advertise that
split, letting the operator below integrate the profile once and rescale
per time step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly import AssembledSystem, LoadAssembler
from .errors import ParameterError

__all__ = [
    "Constant", "SmoothRamp", "Sine",
    "ZeroForce", "Gravity", "CustomForce",
    "ZeroHeat", "Bump", "CustomHeat",
    "Forcing", "InitialData", "homogeneous", "fluid_kick", "compression_kick",
    "ForcingOperator",
]


# ---------------------------------------------------------------------------
# time envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    """Envelope that is simply a constant."""

    value: float = 1.0

    def __call__(self, t: float) -> float:
        return self.value

    def derivative(self, t: float) -> float:
        return 0.0

    def second_derivative(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class SmoothRamp:
    """Rises from 0 to 1 over ``ramp_time`` as sin^2, then stays at 1."""

    ramp_time: float = 0.25

    def __call__(self, t: float) -> float:
        r = self.ramp_time
        return float(np.sin(0.5 * np.pi * t / r) ** 2) if t < r else 1.0

    def derivative(self, t: float) -> float:
        r = self.ramp_time
        return float(0.5 * np.pi / r * np.sin(np.pi * t / r)) if t < r else 0.0

    def second_derivative(self, t: float) -> float:
        r = self.ramp_time
        return float(0.5 * np.pi ** 2 / r ** 2 * np.cos(np.pi * t / r)) if t < r else 0.0


@dataclass(frozen=True)
class Sine:
    amplitude: float = 1.0
    omega: float = 2.0 * np.pi

    def __call__(self, t: float) -> float:
        return self.amplitude * float(np.sin(self.omega * t))

    def derivative(self, t: float) -> float:
        return self.amplitude * self.omega * float(np.cos(self.omega * t))

    def second_derivative(self, t: float) -> float:
        return -self.amplitude * self.omega ** 2 * float(np.sin(self.omega * t))


@dataclass(frozen=True)
class _EnvelopeRate:
    """Time derivative of another envelope, still exposing a derivative."""

    base: object

    def __call__(self, t: float) -> float:
        return self.base.derivative(t)

    def derivative(self, t: float) -> float:
        return self.base.second_derivative(t)

    def second_derivative(self, t: float) -> float:
        raise NotImplementedError("third time derivatives are never needed")


# ---------------------------------------------------------------------------
# body-force presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroForce:
    is_potential = True

    def values(self, points: np.ndarray, t: float) -> np.ndarray:
        return np.zeros_like(points)

    def spatial(self, points: np.ndarray) -> np.ndarray:
        return np.zeros_like(points)

    @property
    def envelope(self):
        return Constant(0.0)

    def potential(self, points: np.ndarray, t: float) -> np.ndarray:
        return np.zeros(points.shape[:-1])

    def derivative(self) -> "ZeroForce":
        return self


@dataclass(frozen=True)
class Gravity:
    """Potential body force: the gradient of ``magnitude * x_axis`` times an envelope.

    The default axis is the last coordinate, i.e. a uniform pull along the
    final axis whose potential is linear in space.
    """

    magnitude: float = 1.0
    axis: int = -1
    envelope: object = field(default_factory=Constant)
    is_potential = True

    def spatial(self, points: np.ndarray) -> np.ndarray:
        out = np.zeros_like(points)
        out[..., self.axis] = self.magnitude
        return out

    def values(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.spatial(points) * self.envelope(t)

    def potential(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.magnitude * points[..., self.axis] * self.envelope(t)

    def derivative(self) -> "Gravity":
        return Gravity(magnitude=self.magnitude, axis=self.axis,
                       envelope=_EnvelopeRate(self.envelope))


@dataclass(frozen=True)
class CustomForce:
    """Arbitrary analytic body force ``fn(points, t) -> (..., dim)``."""

    fn: Callable[[np.ndarray, float], np.ndarray]
    fn_dt: Callable[[np.ndarray, float], np.ndarray] | None = None
    is_potential = False

    def values(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.fn(points, t)

    def derivative(self) -> "CustomForce":
        if self.fn_dt is None:
            raise ParameterError(
                "custom body force needs fn_dt for derivative-system runs")
        return CustomForce(fn=self.fn_dt)


# ---------------------------------------------------------------------------
# heat-source presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroHeat:
    def values(self, points: np.ndarray, t: float) -> np.ndarray:
        return np.zeros(points.shape[:-1])

    def spatial(self, points: np.ndarray) -> np.ndarray:
        return np.zeros(points.shape[:-1])

    @property
    def envelope(self):
        return Constant(0.0)

    def derivative(self) -> "ZeroHeat":
        return self


@dataclass(frozen=True)
class Bump:
    """Gaussian heat deposit ``amplitude * exp(-|x-center|^2/width^2)`` times envelope."""

    center: tuple[float, ...] = (0.75,)
    width: float = 0.15
    amplitude: float = 1.0
    envelope: object = field(default_factory=Constant)

    def spatial(self, points: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center)
        r2 = ((points - c) ** 2).sum(axis=-1)
        return self.amplitude * np.exp(-r2 / self.width ** 2)

    def values(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.spatial(points) * self.envelope(t)

    def derivative(self) -> "Bump":
        return Bump(center=self.center, width=self.width, amplitude=self.amplitude,
                    envelope=_EnvelopeRate(self.envelope))


@dataclass(frozen=True)
class CustomHeat:
    fn: Callable[[np.ndarray, float], np.ndarray]
    fn_dt: Callable[[np.ndarray, float], np.ndarray] | None = None

    def values(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.fn(points, t)

    def derivative(self) -> "CustomHeat":
        if self.fn_dt is None:
            raise ParameterError(
                "custom heat source needs fn_dt for derivative-system runs")
        return CustomHeat(fn=self.fn_dt)


@dataclass(frozen=True)
class Forcing:
    """A body-force preset paired with a heat-source preset."""

    body: object = field(default_factory=ZeroForce)
    heat: object = field(default_factory=ZeroHeat)

    def derivative(self) -> "Forcing":
        return Forcing(body=self.body.derivative(), heat=self.heat.derivative())

    @property
    def is_potential(self) -> bool:
        return bool(getattr(self.body, "is_potential", False))


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Analytic initial fields; ``None`` marks the exact-zero component."""

    w0: Callable[[np.ndarray], np.ndarray] | None = None
    v0: Callable[[np.ndarray], np.ndarray] | None = None
    theta0: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def is_homogeneous(self) -> bool:
        return self.w0 is None and self.v0 is None and self.theta0 is None

    @property
    def is_velocity_only(self) -> bool:
        return self.w0 is None and self.theta0 is None


def homogeneous() -> InitialData:
    return InitialData()


def _gradient_bump(lo: np.ndarray, hi: np.ndarray, amplitude: float, dim: int):
    """Gradient of a sin^2 bump on the box [lo, hi], zero outside it."""
    length = hi - lo

    def v0(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, dim)
        s = (pts - lo) / length
        inside = np.all((s > 0.0) & (s < 1.0), axis=-1)
        sin2 = np.sin(np.pi * s) ** 2
        out = np.zeros_like(pts)
        for k in range(dim):
            rest = np.ones(pts.shape[0])
            for j in range(dim):
                if j != k:
                    rest = rest * sin2[:, j]
            dk = (np.pi / length[k]) * np.sin(2.0 * np.pi * s[:, k]) * rest
            out[:, k] = amplitude * dk * inside
        return out.reshape(np.shape(points))

    return v0


def compression_kick(dim: int, amplitude: float = 1.0) -> InitialData:
    """Initial velocity with order-one divergence across the whole domain.

    The gradient of a full-domain sin^2 bump: it vanishes on the boundary,
    has nonzero divergence in both phases, and injects a stiffness-
    independent amount of compressional kinetic energy — exactly what makes
    the constraint-decay rate of an incompressibility sweep attained with
    slope -1 instead of the steeper quasi-static response.
    """
    return InitialData(v0=_gradient_bump(np.zeros(dim), np.ones(dim),
                                         amplitude, dim))


def fluid_kick(geometry, amplitude: float = 1.0) -> InitialData:
    """Initial velocity with order-one divergence confined to the fluid part.

    The velocity is the gradient of a sin^2 bump supported on the fluid box,
    so it vanishes (with its normal component) on the interface and carries
    compressional kinetic energy — the data that make the constraint-decay
    bounds of the stiff-parameter sweeps attained rather than merely valid.
    """
    from .geometry import FluidInclusion, SolidSlab

    n, dim = geometry.n, geometry.dim
    if isinstance(geometry.layout, SolidSlab):
        lo = np.array([geometry.layout.index / n] + [0.0] * (dim - 1))
        hi = np.ones(dim)
    elif isinstance(geometry.layout, FluidInclusion):
        lo = np.array([b[0] / n for b in geometry.layout.bounds])
        hi = np.array([b[1] / n for b in geometry.layout.bounds])
    else:  # pragma: no cover - layouts are a closed set
        raise ParameterError(f"unsupported layout {geometry.layout!r}")
    return InitialData(v0=_gradient_bump(lo, hi, amplitude, dim))


# ---------------------------------------------------------------------------
# load-vector evaluation
# ---------------------------------------------------------------------------

class ForcingOperator:
    """Evaluates load vectors and forcing norms for one assembled system.

    Separable presets (spatial profile times envelope) are integrated once;
    everything else is quadrature per call.
    """

    def __init__(self, system: AssembledSystem, forcing: Forcing,
                 quad_points: int = 2):
        self.system = system
        self.forcing = forcing
        self._derivative: "ForcingOperator | None" = None
        self.loads = LoadAssembler(system.geometry, system.basis, quad_points)
        self._rho = system.fields.rho_bar
        body, heat = forcing.body, forcing.heat
        self._sep_body = hasattr(body, "spatial")
        self._sep_heat = hasattr(heat, "spatial")
        if self._sep_body:
            prof = body.spatial(self.loads.points)
            self._base_w = system.params.alpha_F * self.loads.vector_load(
                prof, cell_weight=self._rho)
            self._base_rho_F_sq = self.loads.integrate_scalar(
                (prof ** 2).sum(axis=-1), cell_weight=self._rho)
            self._base_F_sq = self.loads.integrate_scalar((prof ** 2).sum(axis=-1))
        if self._sep_heat:
            prof = heat.spatial(self.loads.points)
            self._base_th = self.loads.scalar_load(prof)
            self._base_Psi_sq = self.loads.integrate_scalar(prof ** 2)

    # -- load vectors --------------------------------------------------

    def F_tilde(self, t: float) -> np.ndarray:
        if self._sep_body:
            return self.forcing.body.envelope(t) * self._base_w
        vals = self.forcing.body.values(self.loads.points, t)
        return self.system.params.alpha_F * self.loads.vector_load(
            vals, cell_weight=self._rho)

    def Psi_tilde(self, t: float) -> np.ndarray:
        if self._sep_heat:
            return self.forcing.heat.envelope(t) * self._base_th
        vals = self.forcing.heat.values(self.loads.points, t)
        return self.loads.scalar_load(vals)

    # -- norms for the a-priori constants -------------------------------

    def rho_F_sq(self, t: float) -> float:
        """Density-weighted squared spatial norm of the body force at time t."""
        if self._sep_body:
            return self.forcing.body.envelope(t) ** 2 * self._base_rho_F_sq
        vals = self.forcing.body.values(self.loads.points, t)
        return self.loads.integrate_scalar((vals ** 2).sum(axis=-1),
                                           cell_weight=self._rho)

    def F_sq(self, t: float) -> float:
        if self._sep_body:
            return self.forcing.body.envelope(t) ** 2 * self._base_F_sq
        vals = self.forcing.body.values(self.loads.points, t)
        return self.loads.integrate_scalar((vals ** 2).sum(axis=-1))

    def Psi_sq(self, t: float) -> float:
        if self._sep_heat:
            return self.forcing.heat.envelope(t) ** 2 * self._base_Psi_sq
        vals = self.forcing.heat.values(self.loads.points, t)
        return self.loads.integrate_scalar(vals ** 2)

    def Psi_dt_sq(self, t: float) -> float:
        return self.derivative().Psi_sq(t)

    # -- potential terms (solidification bound, direct limit solver) ----

    def potential_values(self, t: float) -> np.ndarray:
        """Potential at the quadrature points, shape (n_cells, nq)."""
        if not self.forcing.is_potential:
            raise ParameterError("body force has no potential")
        return self.forcing.body.potential(self.loads.points, t)

    def potential_W12_sq(self, t: float) -> float:
        """Squared first-order Sobolev integrand of the potential at time t."""
        phi = self.potential_values(t)
        grad = self.forcing.body.values(self.loads.points, t)
        return self.loads.integrate_scalar(phi ** 2 + (grad ** 2).sum(axis=-1))

    def potential_grad_dt_sq(self, t: float) -> float:
        vals = self.forcing.body.derivative().values(self.loads.points, t)
        return self.loads.integrate_scalar((vals ** 2).sum(axis=-1))

    def derivative(self) -> "ForcingOperator":
        """Operator for the time-differentiated forcing pair (cached)."""
        if self._derivative is None:
            self._derivative = ForcingOperator(self.system, self.forcing.derivative())
        return self._derivative
