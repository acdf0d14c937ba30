# -*- coding: utf-8 -*-
"""Midpoint (Crank–Nicolson) time integration of the coupled system.

One step advances the pair (velocity coefficients ``c``, temperature
coefficients ``b``) through the monolithic block solve

    [ A/dt + A1/2 + (dt/4) A2   -A3^T/2 ] [c+]   [rhs_c]
    [        A3/2                B/dt + B1/2 ] [b+] = [rhs_b]

with the displacement eliminated through its exact midpoint update
``a+ = a + dt (c + c+)/2``.  Loads are sampled at the step midpoint, which
is what makes the discrete energy identity hold to rounding.

The block matrix is constant in time, so it is factorized once per run.
A trajectory can be serialized to a small self-describing binary layout
(see :func:`dump_trajectory`) or rebuilt from it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import AssembledSystem, LoadAssembler
from .errors import SolverError
from .forcing import Forcing, ForcingOperator, InitialData

__all__ = [
    "State", "Trajectory", "project_initial", "CrankNicolson", "integrate",
    "dump_trajectory", "load_trajectory",
]

#: magic bytes opening every binary trajectory dump
TRAJECTORY_MAGIC = b"THFSITRJ"
#: layout revision of the binary trajectory dump
TRAJECTORY_VERSION = 1


@dataclass(frozen=True)
class State:
    """Coefficient snapshot at one time: displacement, velocity, temperature."""

    a: np.ndarray   # (n_w,)  displacement coefficients
    c: np.ndarray   # (n_w,)  velocity coefficients
    b: np.ndarray   # (n_th,) temperature coefficients
    t: float


@dataclass(frozen=True)
class Trajectory:
    """Uniformly spaced states stored as stacked frames."""

    times: np.ndarray   # (K+1,)
    a: np.ndarray       # (K+1, n_w)
    c: np.ndarray       # (K+1, n_w)
    b: np.ndarray       # (K+1, n_th)
    dt: float

    @property
    def n_frames(self) -> int:
        return self.times.shape[0]

    def state(self, k: int) -> State:
        return State(a=self.a[k], c=self.c[k], b=self.b[k], t=float(self.times[k]))

    @property
    def final(self) -> State:
        return self.state(self.n_frames - 1)


def project_initial(system: AssembledSystem, data: InitialData,
                    quad_points: int = 2) -> State:
    """L2-project analytic initial fields onto the discrete spaces.

    Parameters
    ----------
    system : AssembledSystem
        Provides the unweighted Gram matrices (sum of the per-phase mass
        probes) and the quadrature layout.
    data : InitialData
        Analytic fields; ``None`` components map to exact zero vectors.

    Returns
    -------
    State
        Projected coefficients at ``t = 0``.
    """
    basis, probes = system.basis, system.probes
    n_w, n_th = basis.n_w, basis.n_th
    a0 = np.zeros(n_w)
    c0 = np.zeros(n_w)
    b0 = np.zeros(n_th)
    if not data.is_homogeneous:
        loads = LoadAssembler(system.geometry, basis, quad_points)
        if data.w0 is not None or data.v0 is not None:
            gram_w = spla.splu((probes.M_w_f + probes.M_w_s).tocsc())
            if data.w0 is not None:
                a0 = gram_w.solve(loads.vector_load(data.w0(loads.points)))
            if data.v0 is not None:
                c0 = gram_w.solve(loads.vector_load(data.v0(loads.points)))
        if data.theta0 is not None:
            gram_th = spla.splu((probes.M_th_f + probes.M_th_s).tocsc())
            b0 = gram_th.solve(loads.scalar_load(data.theta0(loads.points)))
    return State(a=a0, c=c0, b=b0, t=0.0)


class _DirectSolver:
    """Sparse LU backend; factorization reused for every step."""

    name = "direct"

    def __init__(self, matrix: sp.spmatrix):
        self._lu = spla.splu(matrix.tocsc())

    def solve(self, rhs: np.ndarray) -> tuple[np.ndarray, int]:
        return self._lu.solve(rhs), 1


class _IterativeSolver:
    """Restarted GMRES with an incomplete-LU preconditioner."""

    name = "gmres"

    def __init__(self, matrix: sp.spmatrix):
        csc = matrix.tocsc()
        self._matrix = csc.tocsr()
        ilu = spla.spilu(csc, drop_tol=1e-10, fill_factor=40.0)
        self._prec = spla.LinearOperator(matrix.shape, ilu.solve)

    def solve(self, rhs: np.ndarray) -> tuple[np.ndarray, int]:
        count = [0]

        def tick(_):
            count[0] += 1

        kwargs = dict(M=self._prec, restart=60, maxiter=400, callback=tick,
                      callback_type="pr_norm")
        try:
            y, info = spla.gmres(self._matrix, rhs, rtol=1e-13, atol=0.0, **kwargs)
        except TypeError:  # older scipy spells the relative tolerance "tol"
            y, info = spla.gmres(self._matrix, rhs, tol=1e-13, atol=0.0, **kwargs)
        if info != 0:
            resid = np.linalg.norm(self._matrix @ y - rhs)
            raise SolverError(
                f"gmres did not converge: info={info}, iterations={count[0]}, "
                f"residual={resid:.3e}")
        return y, max(count[0], 1)


_BACKENDS = {"direct": _DirectSolver, "gmres": _IterativeSolver}


class CrankNicolson:
    """Factor-once midpoint stepper for a fixed system and step size."""

    def __init__(self, system: AssembledSystem, dt: float,
                 backend: str = "direct", residual_tol: float = 1e-10):
        if not dt > 0.0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        if backend not in _BACKENDS:
            raise ValueError(f"unknown backend {backend!r}; "
                             f"choose from {sorted(_BACKENDS)}")
        self.system = system
        self.dt = float(dt)
        self.backend = backend
        self.residual_tol = float(residual_tol)

        A, A1, A2, A3 = system.A, system.A1, system.A2, system.A3
        B, B1 = system.B, system.B1
        self._A2 = A2.tocsr()
        self._A3 = A3.tocsr()
        self._A3T = A3.T.tocsr()
        self._lhs = sp.bmat(
            [[A / dt + 0.5 * A1 + 0.25 * dt * A2, -0.5 * A3.T],
             [0.5 * A3, B / dt + 0.5 * B1]], format="csc")
        self._rhs_c = (A / dt - 0.5 * A1 - 0.25 * dt * A2).tocsr()
        self._rhs_b = (B / dt - 0.5 * B1).tocsr()
        self._solver = _BACKENDS[backend](self._lhs)
        self._n_w = system.n_w

    def step(self, state: State, F_half: np.ndarray,
             Psi_half: np.ndarray) -> State:
        """Advance one step given midpoint load vectors.

        Raises
        ------
        SolverError
            If the block solve's relative residual exceeds the tolerance.
        """
        a, c, b = state.a, state.c, state.b
        rhs = np.concatenate([
            self._rhs_c @ c - self._A2 @ a + 0.5 * (self._A3T @ b) + F_half,
            -0.5 * (self._A3 @ c) + self._rhs_b @ b + Psi_half,
        ])
        y, iterations = self._solver.solve(rhs)
        scale = max(float(np.linalg.norm(rhs)), 1e-300)
        resid = float(np.linalg.norm(self._lhs @ y - rhs)) / scale
        if not resid <= self.residual_tol:
            raise SolverError(
                f"{self._solver.name} step at t={state.t!r} exceeded the "
                f"residual tolerance: iterations={iterations}, "
                f"relative residual={resid:.3e} > {self.residual_tol:.1e}")
        c1 = y[:self._n_w]
        b1 = y[self._n_w:]
        a1 = a + 0.5 * self.dt * (c + c1)
        return State(a=a1, c=c1, b=b1, t=state.t + self.dt)


def _step_count(T: float, dt: float) -> int:
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    K = int(round(T / dt))
    if K < 1 or abs(K * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(
            f"final time T={T!r} must be an integer multiple of dt={dt!r}")
    return K


def integrate(system: AssembledSystem, forcing, initial, dt: float, T: float,
              backend: str = "direct", residual_tol: float = 1e-10,
              quad_points: int = 2) -> Trajectory:
    """Run the midpoint scheme from ``t = 0`` to ``t = T``.

    Parameters
    ----------
    forcing : Forcing or ForcingOperator
        Load evaluation; a bare :class:`Forcing` is wrapped on the spot.
    initial : State or InitialData
        Starting coefficients, or analytic fields to project first.

    Returns
    -------
    Trajectory
        Frames at every multiple of ``dt`` including both endpoints.
    """
    if isinstance(forcing, Forcing):
        forcing = ForcingOperator(system, forcing, quad_points)
    if isinstance(initial, InitialData):
        initial = project_initial(system, initial, quad_points)
    K = _step_count(T, dt)
    stepper = CrankNicolson(system, dt, backend=backend,
                            residual_tol=residual_tol)

    times = dt * np.arange(K + 1)
    a = np.empty((K + 1, system.n_w))
    c = np.empty((K + 1, system.n_w))
    b = np.empty((K + 1, system.n_th))
    state = State(a=np.asarray(initial.a, dtype=float),
                  c=np.asarray(initial.c, dtype=float),
                  b=np.asarray(initial.b, dtype=float), t=0.0)
    a[0], c[0], b[0] = state.a, state.c, state.b
    for k in range(K):
        t_half = (k + 0.5) * dt
        state = stepper.step(state, forcing.F_tilde(t_half),
                             forcing.Psi_tilde(t_half))
        a[k + 1], c[k + 1], b[k + 1] = state.a, state.c, state.b
    return Trajectory(times=times, a=a, c=c, b=b, dt=float(dt))


# ---------------------------------------------------------------------------
# binary serialization
# ---------------------------------------------------------------------------

def dump_trajectory(trajectory: Trajectory, path) -> None:
    """Write a trajectory in the fixed little-endian binary layout.

    Layout (all integers signed 64-bit little-endian, floats IEEE-754
    binary64 little-endian)::

        bytes 0..7   magic string "THFSITRJ"
        int64        layout version (currently 1)
        int64        n_w      displacement/velocity coefficient count
        int64        n_th     temperature coefficient count
        int64        n_frames stored frame count (steps + 1)
        float64      dt       step size
        float64      t0       time of the first frame
        then per frame, contiguously:
            float64[n_w]   a   displacement coefficients
            float64[n_w]   c   velocity coefficients
            float64[n_th]  b   temperature coefficients
    """
    n_frames, n_w = trajectory.a.shape
    n_th = trajectory.b.shape[1]
    with open(path, "wb") as fh:
        fh.write(TRAJECTORY_MAGIC)
        fh.write(struct.pack("<qqqq", TRAJECTORY_VERSION, n_w, n_th, n_frames))
        fh.write(struct.pack("<dd", trajectory.dt, float(trajectory.times[0])))
        frame = np.empty(2 * n_w + n_th)
        for k in range(n_frames):
            frame[:n_w] = trajectory.a[k]
            frame[n_w:2 * n_w] = trajectory.c[k]
            frame[2 * n_w:] = trajectory.b[k]
            fh.write(frame.astype("<f8").tobytes())


def load_trajectory(path) -> Trajectory:
    """Read a trajectory written by :func:`dump_trajectory`."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != TRAJECTORY_MAGIC:
            raise ValueError(f"not a trajectory dump: magic={magic!r}")
        version, n_w, n_th, n_frames = struct.unpack("<qqqq", fh.read(32))
        if version != TRAJECTORY_VERSION:
            raise ValueError(f"unsupported trajectory layout version {version}")
        dt, t0 = struct.unpack("<dd", fh.read(16))
        per_frame = 2 * n_w + n_th
        data = np.frombuffer(fh.read(8 * per_frame * n_frames), dtype="<f8")
    data = data.reshape(n_frames, per_frame)
    return Trajectory(
        times=t0 + dt * np.arange(n_frames),
        a=np.ascontiguousarray(data[:, :n_w]),
        c=np.ascontiguousarray(data[:, n_w:2 * n_w]),
        b=np.ascontiguousarray(data[:, 2 * n_w:]),
        dt=float(dt))
