"""Energy and boundary-work functionals evaluated on a discrete state.

Depth integrals are trapezoid sums; the cross-section factor A = pi rho^2
turns them into volume integrals over the cylinder and is applied here,
never inside the operators.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import (
    AnalysisConstants,
    DriveValues,
    FieldState,
    Grid1D,
    Parameters,
    TensionProfile,
    TimeFunction,
)
from .operators import midpoint_tension, second_difference

CSV_COLUMNS = (
    "t",
    "E",
    "I_b",
    "d_t",
    "r",
    "H",
    "q",
    "norm_u_sq",
    "norm_v_sq",
    "norm_uzz_sq",
    "max_abs_u",
)


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    I_b: float
    d_t: float
    r: float
    H: float
    q: float
    norm_u_sq: float
    norm_v_sq: float
    norm_uzz_sq: float
    max_abs_u: float
    # running time integrals, accumulated step by step by the integrator
    int_I_b: float = 0.0
    int_dissipation: float = 0.0
    int_d_t: float = 0.0

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in CSV_COLUMNS)


@dataclass
class TimeSeries:
    records: list[DiagnosticsRecord] = field(default_factory=list)
    fingerprint: str = ""

    def append(self, record: DiagnosticsRecord) -> None:
        if self.records and not record.t > self.records[-1].t:
            raise ValueError(f"record time {record.t} does not increase past {self.records[-1].t}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    @property
    def E(self) -> np.ndarray:
        return self.column("E")


def fingerprint(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def quad_1d(f: np.ndarray, grid: Grid1D) -> float:
    """Composite trapezoid over [0, h]."""
    f = np.asarray(f, dtype=float)
    return float(grid.dz * (f.sum() - 0.5 * (f[0] + f[-1])))


def tension_energy_density(u: np.ndarray, a, grid: Grid1D) -> float:
    """Integral of a(z) u_z^2, u_z taken on cells at their midpoints.

    This is the quadrature that pairs exactly with the flux-form tension
    operator under summation by parts.
    """
    a_mid = midpoint_tension(a, grid)
    du = np.diff(u) / grid.dz
    return float(grid.dz * np.sum(a_mid * du * du))


def energy(state: FieldState, params: Parameters, a, grid: Grid1D, alpha: float) -> float:
    """(A/2) (||u_t||^2 + k ||u_zz||^2 + int a u_z^2)."""
    uzz = second_difference(state.u, grid, alpha)
    kinetic = quad_1d(state.v**2, grid)
    bending = quad_1d(uzz**2, grid)
    return 0.5 * params.area * (kinetic + params.k * bending + tension_energy_density(state.u, a, grid))


def drag_rate(state: FieldState, b: TimeFunction, params: Parameters, grid: Grid1D) -> float:
    """A b(t) int |u_t|^(p+2) dz, never negative."""
    return params.area * float(b.value(state.t)) * quad_1d(np.abs(state.v) ** (params.p + 2.0), grid)


def boundary_work_rate(drive: DriveValues, a_h: float, params: Parameters) -> float:
    """d_t = A (a_h phi' alpha - g3/2 phi'^2); depends on no field value."""
    return params.area * (a_h * drive.dphi * drive.alpha - 0.5 * params.g3 * drive.dphi**2)


def r_term(drive: DriveValues, a_h: float, params: Parameters) -> float:
    """r = A (a_h alpha phi - g3 phi phi')."""
    return params.area * (a_h * drive.alpha * drive.phi - params.g3 * drive.phi * drive.dphi)


def q_term(drive: DriveValues, params: Parameters) -> float:
    """q = A (2 phi alpha + phi^2) with the signed alpha."""
    return params.area * (2.0 * drive.phi * drive.alpha + drive.phi**2)


def h_functional(state: FieldState, E: float, sigma: float, params: Parameters, grid: Grid1D) -> float:
    return params.area * quad_1d(state.u * state.v, grid) + sigma * E


def energy_sandwich(
    state: FieldState,
    E: float,
    constants: AnalysisConstants,
    params: Parameters,
    grid: Grid1D,
    alpha: float,
    rel_slack: float = 0.0,
) -> tuple[bool, bool]:
    """Check the two-sided bound on 2E in terms of ||u_t||^2 and ||u_zz||^2."""
    A = params.area
    v_sq = A * quad_1d(state.v**2, grid)
    uzz_sq = A * quad_1d(second_difference(state.u, grid, alpha) ** 2, grid)
    lower = v_sq + constants.sandwich_lower * uzz_sq
    upper = v_sq + constants.sandwich_upper * uzz_sq
    two_e = 2.0 * E
    return lower <= two_e * (1.0 + rel_slack), two_e <= upper * (1.0 + rel_slack)


def compute_record(
    state: FieldState,
    drive: DriveValues,
    params: Parameters,
    tension: TensionProfile,
    b: TimeFunction,
    grid: Grid1D,
    sigma: float,
) -> DiagnosticsRecord:
    A = params.area
    E = energy(state, params, tension, grid, drive.alpha)
    uzz = second_difference(state.u, grid, drive.alpha)
    return DiagnosticsRecord(
        t=state.t,
        E=E,
        I_b=drag_rate(state, b, params, grid),
        d_t=boundary_work_rate(drive, tension.a_h, params),
        r=r_term(drive, tension.a_h, params),
        H=h_functional(state, E, sigma, params, grid),
        q=q_term(drive, params),
        norm_u_sq=A * quad_1d(state.u**2, grid),
        norm_v_sq=A * quad_1d(state.v**2, grid),
        norm_uzz_sq=A * quad_1d(uzz**2, grid),
        max_abs_u=float(np.max(np.abs(state.u))),
    )


def record_to_dict(record: DiagnosticsRecord) -> dict:
    return asdict(record)
