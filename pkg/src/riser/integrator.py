"""Time stepping for the riser equation.

Two schemes share one interface:

* ``newmark``: average-acceleration Newmark (beta=1/4, gamma=1/2). Bending,
  tension and the Coriolis transport are implicit through one banded LU
  factorization per run; the drag is resolved by Picard iteration on the
  new velocity. With homogeneous boundary data the discrete energy can only
  decrease, step by step.
* ``rk4``: classical explicit Runge-Kutta on (u, u_t), kept for
  cross-validation. It needs ``dt`` of order dz^2 / sqrt(k).

Boundary nodes are never solved for; they are reset from (phi, phi') at
every new time level.
"""

from __future__ import annotations

import logging
import math
import os
import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg.lapack import dgbtrf, dgbtrs

from .diagnostics import TimeSeries, boundary_work_rate, compute_record, quad_1d
from .errors import Diverged, NonFinite, PicardStalled
from .model import (
    DriveValues,
    FieldState,
    Grid1D,
    Parameters,
    TensionProfile,
    TimeFunction,
    apply_boundary,
    evaluate_drive,
)
from .operators import (
    acceleration,
    biharmonic,
    drag_force,
    first_derivative,
    midpoint_tension,
    stiffness_bands,
    tension_divergence,
)

log = logging.getLogger(__name__)

SCHEMES = ("newmark", "rk4")
CORIOLIS_MODES = ("implicit", "lagged")


@dataclass(frozen=True)
class RiserProblem:
    grid: Grid1D
    params: Parameters
    tension: TensionProfile
    b: TimeFunction
    phi: TimeFunction
    alpha: TimeFunction
    source: Callable | None = None

    def drive(self, t: float) -> DriveValues:
        return evaluate_drive(self.phi, self.alpha, t)


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "newmark"
    dt: float | str = "auto"
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    coriolis: str = "implicit"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.coriolis not in CORIOLIS_MODES:
            raise ValueError(f"unknown Coriolis treatment {self.coriolis!r}")
        if self.dt != "auto" and not (isinstance(self.dt, (int, float)) and self.dt > 0):
            raise ValueError(f"dt must be positive or 'auto', got {self.dt!r}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iters < 1:
            raise ValueError("picard_max_iters must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    t_end: float
    record_stride: int = 1
    checkpoint_stride: int | None = None

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.checkpoint_stride is not None and self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be >= 1")


@dataclass
class Scenario:
    problem: RiserProblem
    initial: FieldState
    scheme: SchemeConfig
    run: RunConfig
    sigma: float
    fingerprint: str = ""
    extras: dict = field(default_factory=dict)


def stable_dt(grid: Grid1D, params: Parameters, a: TensionProfile) -> float:
    """Explicit RK4 step limit: 0.5 dz^2 / sqrt(k), shrunk when tension stiffens the spectrum.

    The largest discrete frequency satisfies
    omega^2 <= 16 k / dz^4 + 4 max|a| / dz^2.
    """
    dz = grid.dz
    base = 0.5 * dz**2 / math.sqrt(params.k)
    return base / math.sqrt(1.0 + a.a_max_abs * dz**2 / (4.0 * params.k))


def resolve_dt(scheme: SchemeConfig, problem: RiserProblem, t_end: float) -> tuple[float, int]:
    """Step size and step count landing exactly on ``t_end``."""
    grid = problem.grid
    if scheme.dt == "auto":
        target = stable_dt(grid, problem.params, problem.tension) if scheme.scheme == "rk4" else grid.h / (10 * grid.N)
    else:
        target = float(scheme.dt)
    if t_end == 0:
        return target, 0
    n_steps = max(1, math.ceil(t_end / target - 1e-9))
    return t_end / n_steps, n_steps


class NewmarkStepper:
    def __init__(self, problem: RiserProblem, dt: float, scheme: SchemeConfig = SchemeConfig()):
        self.problem = problem
        self.dt = dt
        self.tol = scheme.picard_tol
        self.max_iters = scheme.picard_max_iters
        self.implicit_coriolis = scheme.coriolis == "implicit"
        grid = problem.grid
        self.a_mid = midpoint_tension(problem.tension, grid)
        S = 0.5 * dt * stiffness_bands(grid, problem.params.k, self.a_mid)
        S[2] += 2.0 / dt
        g3 = problem.params.g3
        if self.implicit_coriolis and g3 != 0.0:
            S[1, 1:] += g3 / (2.0 * grid.dz)
            S[3, :-1] -= g3 / (2.0 * grid.dz)
        ab = np.zeros((7, grid.N - 1))
        ab[2:] = S
        self._lu, self._piv, info = dgbtrf(ab, 2, 2)
        if info != 0:
            raise Diverged(f"Newmark system matrix is singular (dgbtrf info={info})")

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = dgbtrs(self._lu, 2, 2, rhs, self._piv)
        if info != 0:
            raise Diverged(f"banded solve failed (dgbtrs info={info})")
        return x

    def initial_acceleration(self, state: FieldState, drive: DriveValues) -> np.ndarray:
        pb = self.problem
        return acceleration(
            state.u, state.v, state.t, pb.grid, pb.params, self.a_mid, pb.b, drive.alpha, pb.source
        )

    def step(self, state: FieldState, t_new: float | None = None) -> FieldState:
        pb = self.problem
        grid, params, dt = pb.grid, pb.params, self.dt
        t1 = state.t + dt if t_new is None else t_new
        if state.a is None:
            state.a = self.initial_acceleration(state, pb.drive(state.t))
        drive = pb.drive(t1)
        u0, v0, a0 = state.u, state.v, state.a

        u_pred = u0 + 0.5 * dt * v0
        u_pred[0] = 0.0
        u_pred[-1] = drive.phi
        elastic = -params.k * biharmonic(u_pred, grid, drive.alpha) + tension_divergence(u_pred, self.a_mid, grid)
        rhs = (2.0 / dt) * v0[1:-1] + a0[1:-1] + elastic[1:-1]
        if pb.source is not None:
            rhs += pb.source(grid.z, t1)[1:-1]
        g3 = params.g3
        if g3 != 0.0:
            if self.implicit_coriolis:
                rhs[-1] -= g3 * drive.dphi / (2.0 * grid.dz)
            else:
                rhs -= g3 * first_derivative(v0, grid)[1:-1]

        b1 = float(pb.b.value(t1))
        v = v0[1:-1] + dt * a0[1:-1]
        for _ in range(self.max_iters):
            v_new = self._solve(rhs - drag_force(v, b1, params.p))
            change = np.max(np.abs(v_new - v))
            v = v_new
            if b1 == 0.0 or change <= self.tol * np.max(np.abs(v)):
                break
        else:
            raise PicardStalled(
                f"drag iteration did not reach relative tolerance {self.tol:g} in {self.max_iters} sweeps", t1
            )

        u1 = np.empty_like(u0)
        v1 = np.empty_like(v0)
        a1 = np.zeros_like(a0)
        u1[1:-1] = u_pred[1:-1] + 0.5 * dt * v
        v1[1:-1] = v
        a1[1:-1] = (2.0 / dt) * (v - v0[1:-1]) - a0[1:-1]
        new = apply_boundary(FieldState(u1, v1, t1, a1), drive)
        if not new.is_finite():
            raise Diverged("non-finite state", t1)
        return new


class RK4Stepper:
    def __init__(self, problem: RiserProblem, dt: float, scheme: SchemeConfig | None = None):
        self.problem = problem
        self.dt = dt
        self.a_mid = midpoint_tension(problem.tension, problem.grid)

    def _rhs(self, t, u_int, v_int):
        pb = self.problem
        drive = pb.drive(t)
        u = np.concatenate(([0.0], u_int, [drive.phi]))
        v = np.concatenate(([0.0], v_int, [drive.dphi]))
        acc = acceleration(u, v, t, pb.grid, pb.params, self.a_mid, pb.b, drive.alpha, pb.source)
        return v_int, acc[1:-1]

    def step(self, state: FieldState, t_new: float | None = None) -> FieldState:
        dt = self.dt
        t0 = state.t
        t1 = t0 + dt if t_new is None else t_new
        u, v = state.u[1:-1], state.v[1:-1]
        k1u, k1v = self._rhs(t0, u, v)
        k2u, k2v = self._rhs(t0 + 0.5 * dt, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
        k3u, k3v = self._rhs(t0 + 0.5 * dt, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
        k4u, k4v = self._rhs(t0 + dt, u + dt * k3u, v + dt * k3v)
        u_new = state.u.copy()
        v_new = state.v.copy()
        u_new[1:-1] = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v_new[1:-1] = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        new = apply_boundary(FieldState(u_new, v_new, t1), self.problem.drive(t1))
        if not new.is_finite():
            raise Diverged("non-finite state", t1)
        return new


def make_stepper(problem: RiserProblem, dt: float, scheme: SchemeConfig):
    cls = NewmarkStepper if scheme.scheme == "newmark" else RK4Stepper
    return cls(problem, dt, scheme)


def step(state: FieldState, dt: float, scheme: SchemeConfig, problem: RiserProblem) -> FieldState:
    """Advance one step. Builds a fresh stepper; use :func:`make_stepper` in loops."""
    try:
        return make_stepper(problem, dt, scheme).step(state)
    except NonFinite as exc:
        raise Diverged(str(exc), state.t + dt) from exc


# --- checkpoints -----------------------------------------------------------
# Little-endian header followed by u, v, a as float64 arrays of N+1 entries.

CHECKPOINT_MAGIC = b"RISERCKP"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<8sIIQQdddddd")
_SCHEME_IDS = {"newmark": 0, "rk4": 1}


@dataclass
class Checkpoint:
    state: FieldState
    step: int
    dt: float
    scheme: str
    h: float
    integrals: tuple[float, float, float]


def write_checkpoint(path, ckpt: Checkpoint) -> None:
    st = ckpt.state
    n = st.u.size - 1
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        _SCHEME_IDS[ckpt.scheme],
        n,
        ckpt.step,
        ckpt.h,
        st.t,
        ckpt.dt,
        *ckpt.integrals,
    )
    acc = st.a if st.a is not None else np.zeros_like(st.u)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        for arr in (st.u, st.v, acc):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    os.replace(tmp, path)


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, scheme_id, n, step_no, h, t, dt, i1, i2, i3 = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"{path} is not a riser checkpoint")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    arrays = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(3, n + 1).astype(float)
    scheme = {v: k for k, v in _SCHEME_IDS.items()}[scheme_id]
    acc = arrays[2].copy() if scheme == "newmark" else None
    state = FieldState(arrays[0].copy(), arrays[1].copy(), t, acc)
    return Checkpoint(state, step_no, dt, scheme, h, (i1, i2, i3))


# --- run -------------------------------------------------------------------


def run(
    scenario: Scenario,
    checkpoint_path=None,
    resume_from=None,
    on_record: Callable | None = None,
) -> TimeSeries:
    """Integrate to ``t_end``, recording diagnostics every ``record_stride`` steps.

    The series always contains the initial record (or, after a resume, the
    records following the checkpoint) and the record at ``t_end``.
    Running integrals of I_b, of int |u_t|^(p+2) and of d_t are accumulated
    per step with the trapezoid rule.
    """
    pb = scenario.problem
    params, grid = pb.params, pb.grid
    cfg = scenario.run
    dt, n_steps = resolve_dt(scenario.scheme, pb, cfg.t_end)
    stepper = make_stepper(pb, dt, scenario.scheme)
    series = TimeSeries(fingerprint=scenario.fingerprint)

    def dissipation(st):
        return params.area * quad_1d(np.abs(st.v) ** (params.p + 2.0), grid)

    def make_record(st, drive, totals):
        rec = compute_record(st, drive, params, pb.tension, pb.b, grid, scenario.sigma)
        rec.int_I_b, rec.int_dissipation, rec.int_d_t = totals
        if on_record is not None:
            on_record(rec)
        return rec

    if resume_from is not None:
        ckpt = read_checkpoint(resume_from)
        if ckpt.state.u.size != grid.N + 1 or ckpt.scheme != scenario.scheme.scheme:
            raise ValueError("checkpoint does not match the scenario grid or scheme")
        state, start, totals = ckpt.state, ckpt.step, list(ckpt.integrals)
        drive = pb.drive(state.t)
    else:
        state = scenario.initial.copy()
        state.t = 0.0
        drive = pb.drive(0.0)
        apply_boundary(state, drive)
        if isinstance(stepper, NewmarkStepper):
            state.a = stepper.initial_acceleration(state, drive)
        start, totals = 0, [0.0, 0.0, 0.0]
        series.append(make_record(state, drive, totals))

    a_h = pb.tension.a_h
    w_prev = dissipation(state)
    b_prev = float(pb.b.value(state.t))
    d_prev = boundary_work_rate(drive, a_h, params)
    for s in range(start + 1, n_steps + 1):
        t1 = cfg.t_end if s == n_steps else s * dt
        try:
            state = stepper.step(state, t1)
        except NonFinite as exc:
            raise Diverged(str(exc), t1) from exc
        drive = pb.drive(t1)
        w = dissipation(state)
        b1 = float(pb.b.value(t1))
        d1 = boundary_work_rate(drive, a_h, params)
        totals[0] += 0.5 * dt * (b_prev * w_prev + b1 * w)
        totals[1] += 0.5 * dt * (w_prev + w)
        totals[2] += 0.5 * dt * (d_prev + d1)
        w_prev, b_prev, d_prev = w, b1, d1
        if s % cfg.record_stride == 0 or s == n_steps:
            series.append(make_record(state, drive, tuple(totals)))
        if checkpoint_path is not None and cfg.checkpoint_stride and s % cfg.checkpoint_stride == 0:
            write_checkpoint(
                checkpoint_path,
                Checkpoint(state, s, dt, scenario.scheme.scheme, grid.h, tuple(totals)),
            )
    log.debug("run finished: %d steps of dt=%.3g, %d records", n_steps, dt, len(series))
    return series
