"""Physical parameters, coefficient functions and the discrete riser state.

Everything here is an immutable value object except :class:`FieldState`.
Units are documented, not enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NegativePhi, RigidityViolated, SigmaTooSmall

MIN_GRID_INTERVALS = 4


@dataclass(frozen=True)
class Parameters:
    """Constants of the riser equation.

    k   flexural rigidity (force * length**2)
    p   drag exponent, real >= 1
    g   Coriolis 3-vector; only ``g[2]`` acts on depth-only fields
    rho cylinder radius, h riser height, b0 drag-coefficient floor
    """

    k: float
    p: float = 1.0
    g: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rho: float = 1.0
    h: float = 1.0
    b0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        if len(self.g) != 3:
            raise ValueError("g must have three components")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not self.p >= 1:
            raise ValueError(f"drag exponent p must be >= 1, got {self.p}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.h > 0.5:
            raise ValueError(f"riser height must exceed 1/2, got {self.h}")
        if not self.b0 > 0:
            raise ValueError(f"b0 must be positive, got {self.b0}")

    @property
    def area(self) -> float:
        """Cross-section area pi * rho**2."""
        return math.pi * self.rho**2

    @property
    def g3(self) -> float:
        return self.g[2]


_TIME_KINDS = ("constant", "power", "decaying_sinusoid", "table")


@dataclass(frozen=True)
class TimeFunction:
    """Scalar function of time used for phi, alpha and b.

    Kinds (``(1+t)`` avoids the singularity of ``t**e`` at the origin):

    * ``constant``: ``value``
    * ``power``: ``M * (1+t)**e``
    * ``decaying_sinusoid``: ``M * (1+t)**e * (2 + sin(omega t)) / 3``
    * ``table``: piecewise-linear interpolation of ``(times, values)``

    Both :meth:`value` and :meth:`derivative` accept scalars or arrays.
    """

    kind: str
    M: float = 0.0
    e: float = 0.0
    omega: float = 0.0
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _TIME_KINDS:
            raise ValueError(f"unknown time-function kind {self.kind!r}")
        if self.kind == "table":
            ts = np.asarray(self.times, dtype=float)
            if ts.size < 2 or ts.size != len(self.values):
                raise ValueError("table needs >= 2 (time, value) samples of equal length")
            if np.any(np.diff(ts) <= 0):
                raise ValueError("table times must be strictly increasing")
            object.__setattr__(self, "times", tuple(float(x) for x in self.times))
            object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    @classmethod
    def constant(cls, value: float) -> TimeFunction:
        return cls("constant", M=float(value))

    @classmethod
    def power(cls, M: float, e: float) -> TimeFunction:
        return cls("power", M=float(M), e=float(e))

    @classmethod
    def decaying_sinusoid(cls, M: float, e: float, omega: float) -> TimeFunction:
        return cls("decaying_sinusoid", M=float(M), e=float(e), omega=float(omega))

    @classmethod
    def table(cls, times, values) -> TimeFunction:
        return cls("table", times=tuple(times), values=tuple(values))

    @property
    def exponent(self) -> float | None:
        """Growth exponent of the parametric kinds (0 for constants)."""
        if self.kind in ("power", "decaying_sinusoid"):
            return self.e
        if self.kind == "constant":
            return 0.0
        return None

    def value(self, t):
        if self.kind == "constant":
            return np.full(np.shape(t), self.M) if np.ndim(t) else self.M
        if self.kind == "power":
            return self.M * (1.0 + t) ** self.e
        if self.kind == "decaying_sinusoid":
            return self.M * (1.0 + t) ** self.e * (2.0 + np.sin(self.omega * t)) / 3.0
        out = np.interp(t, self.times, self.values)
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self, t):
        if self.kind == "constant":
            return np.zeros(np.shape(t)) if np.ndim(t) else 0.0
        if self.kind == "power":
            return self.M * self.e * (1.0 + t) ** (self.e - 1.0)
        if self.kind == "decaying_sinusoid":
            s = 1.0 + t
            w = self.omega
            return (
                self.M
                * (self.e * s ** (self.e - 1.0) * (2.0 + np.sin(w * t)) + s**self.e * w * np.cos(w * t))
                / 3.0
            )
        # centered difference of the interpolant; one-sided where t - step < 0
        t_arr = np.asarray(t, dtype=float)
        step = 1e-6 * np.maximum(1.0, np.abs(t_arr))
        lo = np.maximum(t_arr - step, 0.0)
        hi = t_arr + step
        out = (np.interp(hi, self.times, self.values) - np.interp(lo, self.times, self.values)) / (hi - lo)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.M}
        if self.kind == "power":
            return {"kind": "power", "M": self.M, "e": self.e}
        if self.kind == "decaying_sinusoid":
            return {"kind": "decaying_sinusoid", "M": self.M, "e": self.e, "omega": self.omega}
        return {"kind": "table", "t": list(self.times), "values": list(self.values)}


_TENSION_KINDS = ("constant", "polynomial", "table")


@dataclass(frozen=True)
class TensionProfile:
    """Effective-tension coefficient a(z) on [0, h].

    ``a_max_abs`` is max|a| estimated by uniform sampling at
    ``max(10**4, 100 * N)`` points together with the N+1 grid nodes, so it
    bounds |a| at every node exactly.
    """

    kind: str
    h: float
    coeffs: tuple[float, ...] = ()
    z_table: tuple[float, ...] = ()
    N: int = 0
    a_h: float = field(init=False)
    a_max_abs: float = field(init=False)

    def __post_init__(self):
        if self.kind not in _TENSION_KINDS:
            raise ValueError(f"unknown tension-profile kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.kind == "table":
            zs = np.asarray(self.z_table, dtype=float)
            if zs.size < 2 or zs.size != len(self.coeffs) or np.any(np.diff(zs) <= 0):
                raise ValueError("tension table needs matching, increasing depth samples")
            object.__setattr__(self, "z_table", tuple(float(x) for x in self.z_table))
        elif not self.coeffs:
            raise ValueError("tension profile needs at least one coefficient")
        n_dense = max(10_000, 100 * self.N)
        z = np.linspace(0.0, self.h, n_dense)
        if self.N > 0:
            z = np.concatenate([z, np.linspace(0.0, self.h, self.N + 1)])
        object.__setattr__(self, "a_max_abs", float(np.max(np.abs(self(z)))))
        object.__setattr__(self, "a_h", float(self(self.h)))

    @classmethod
    def constant(cls, value: float, h: float, N: int = 0) -> TensionProfile:
        return cls("constant", h=h, coeffs=(float(value),), N=N)

    @classmethod
    def polynomial(cls, coeffs, h: float, N: int = 0) -> TensionProfile:
        """``coeffs`` in ascending powers of z."""
        return cls("polynomial", h=h, coeffs=tuple(coeffs), N=N)

    @classmethod
    def table(cls, z, values, h: float, N: int = 0) -> TensionProfile:
        return cls("table", h=h, coeffs=tuple(values), z_table=tuple(z), N=N)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "constant":
            out = np.full_like(z, self.coeffs[0])
        elif self.kind == "polynomial":
            out = np.polynomial.polynomial.polyval(z, self.coeffs)
        else:
            out = np.interp(z, self.z_table, self.coeffs)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.coeffs[0]}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coeffs": list(self.coeffs)}
        return {"kind": "table", "z": list(self.z_table), "values": list(self.coeffs)}


@dataclass(frozen=True)
class AnalysisConstants:
    delta: float
    sigma: float
    k0: float
    mu: float
    a_max_abs: float
    h: float
    k: float

    @property
    def condK_rhs(self) -> float:
        """k0 / (delta * a_max_abs * h), infinite for a vanishing tension."""
        denom = self.delta * self.a_max_abs * self.h
        return math.inf if denom == 0 else self.k0 / denom

    @property
    def sandwich_lower(self) -> float:
        return self.k0 * (self.delta - 1.0) / self.delta

    @property
    def sandwich_upper(self) -> float:
        d = self.delta
        return ((d + 1.0) * self.k + (d - 1.0) * 4.0 * self.a_max_abs * self.h**2) / d


@dataclass(frozen=True)
class GrowthSpec:
    """Growth exponents (m, n, lambda) of phi, alpha, b and margin iota."""

    m: float
    n: float
    lam: float
    iota: float
    M1: float = 1.0
    M2: float = 1.0
    M3: float = 1.0

    def __post_init__(self):
        if not self.iota > 0:
            raise ValueError(f"iota must be positive, got {self.iota}")
        if min(self.M1, self.M2, self.M3) <= 0:
            raise ValueError("growth constants M1, M2, M3 must be positive")


@dataclass(frozen=True)
class Grid1D:
    """Uniform depth grid z_i = i * dz, i = 0..N."""

    h: float
    N: int

    def __post_init__(self):
        if self.N < MIN_GRID_INTERVALS:
            raise ValueError(f"grid needs N >= {MIN_GRID_INTERVALS}, got {self.N}")
        if not self.h > 0:
            raise ValueError("grid length must be positive")

    @property
    def dz(self) -> float:
        return self.h / self.N

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, self.h, self.N + 1)

    @property
    def z_mid(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dz


@dataclass
class FieldState:
    """Nodal displacement ``u`` and velocity ``v`` at time ``t``.

    ``a`` caches the nodal acceleration for schemes that carry it between
    steps (Newmark); it is ``None`` until first computed.
    """

    u: np.ndarray
    v: np.ndarray
    t: float = 0.0
    a: np.ndarray | None = None

    def copy(self) -> FieldState:
        return FieldState(
            self.u.copy(), self.v.copy(), self.t, None if self.a is None else self.a.copy()
        )

    def is_finite(self) -> bool:
        ok = bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))
        return ok and (self.a is None or bool(np.all(np.isfinite(self.a))))


class DriveValues(NamedTuple):
    phi: float
    dphi: float
    alpha: float


def apply_boundary(state: FieldState, drive: DriveValues) -> FieldState:
    """Clamp the bottom and impose u = phi, u_t = phi' at the top, in place."""
    state.u[0] = 0.0
    state.v[0] = 0.0
    state.u[-1] = drive.phi
    state.v[-1] = drive.dphi
    return state


def evaluate_drive(phi: TimeFunction, alpha: TimeFunction, t: float) -> DriveValues:
    """Top-end data (phi, phi', alpha) at time ``t >= 0``."""
    if t < 0:
        raise ValueError(f"drive evaluated at negative time {t}")
    value = float(phi.value(t))
    if value < 0:
        raise NegativePhi(f"phi({t:.6g}) = {value:.6g} is negative; top displacement is radial")
    return DriveValues(value, float(phi.derivative(t)), float(alpha.value(t)))


def default_sigma(h: float, a_max_abs: float) -> float:
    return 16.0 * h / math.sqrt(a_max_abs) if a_max_abs > 0 else math.inf


def derive_constants(
    params: Parameters, a: TensionProfile, delta: float = 2.0, sigma: float | None = None
) -> AnalysisConstants:
    """Rigidity margin k0 and the H-functional margin mu.

    Raises RigidityViolated when k <= 4 max|a| h**2 and SigmaTooSmall when
    sigma <= 8 h / sqrt(max|a|). ``sigma=None`` selects 16 h / sqrt(max|a|).
    """
    if not delta > 1:
        raise ValueError(f"delta must exceed 1, got {delta}")
    a_hat = a.a_max_abs
    h = params.h
    k0 = params.k - 4.0 * a_hat * h**2
    if k0 <= 0:
        raise RigidityViolated(
            f"rigidity condition k > 4 max|a| h^2 fails: k={params.k:g}, "
            f"4 max|a| h^2={4.0 * a_hat * h**2:g} (k0={k0:g})"
        )
    if a_hat == 0:
        raise SigmaTooSmall("no finite sigma exceeds 8h/sqrt(max|a|) when a vanishes identically")
    bound = 8.0 * h / math.sqrt(a_hat)
    if sigma is None:
        sigma = default_sigma(h, a_hat)
    if not sigma > bound:
        raise SigmaTooSmall(f"sigma={sigma:g} must exceed 8h/sqrt(max|a|)={bound:g}")
    return AnalysisConstants(
        delta=float(delta), sigma=float(sigma), k0=k0, mu=sigma - bound, a_max_abs=a_hat, h=h, k=params.k
    )
