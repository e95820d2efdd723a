"""Which stability and decay guarantees apply to a scenario.

Pointwise-in-time hypotheses are checked on a declared sample of times
(default 1000 points, log-spaced on [0, t_end]); strict inequalities are
tested with zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import boundary_work_rate
from .errors import RigidityViolated, SigmaTooSmall
from .model import (
    AnalysisConstants,
    DriveValues,
    GrowthSpec,
    Parameters,
    TensionProfile,
    TimeFunction,
    derive_constants,
)

DEFAULT_SAMPLES = 1000
MIN_SAMPLES = 100

SUMMARY_THEOREM = "Theorem 1 decay guaranteed"
SUMMARY_LEMMA = "Lemma 2 stability guaranteed"
SUMMARY_OUTSIDE = "outside hypotheses — simulation exploratory"


@dataclass
class SampledVerdict:
    t: np.ndarray
    values: np.ndarray
    ok: np.ndarray

    @property
    def overall(self) -> bool:
        return bool(np.all(self.ok))

    def first_failure(self) -> float | None:
        bad = np.flatnonzero(~self.ok)
        return float(self.t[bad[0]]) if bad.size else None

    def summary(self) -> dict:
        return {
            "ok": self.overall,
            "n_samples": int(self.t.size),
            "n_violations": int(np.count_nonzero(~self.ok)),
            "first_violation_t": self.first_failure(),
        }


def sample_times(t_end: float, n: int = DEFAULT_SAMPLES) -> np.ndarray:
    """``n`` times: 0 followed by log-spaced points up to ``max(t_end, 1)``."""
    n = max(n, MIN_SAMPLES)
    t_max = max(float(t_end), 1.0)
    return np.concatenate(([0.0], np.geomspace(min(1e-3, t_max / 1e3), t_max, n - 1)))


def condK_lhs(phi, alpha):
    """(2|alpha| phi + phi^2) / alpha^2 with the degenerate cases resolved.

    alpha = 0 and phi > 0 gives +inf (violated); alpha = phi = 0 gives 0.
    """
    phi = np.asarray(phi, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    num = 2.0 * np.abs(alpha) * phi + phi**2
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = num / alpha**2
    lhs = np.where(alpha == 0, np.where(phi == 0, 0.0, np.inf), lhs)
    return lhs


def check_condK(phi: TimeFunction, alpha: TimeFunction, constants: AnalysisConstants, t_samples) -> SampledVerdict:
    t = np.asarray(t_samples, dtype=float)
    lhs = condK_lhs(phi.value(t), alpha.value(t))
    return SampledVerdict(t, lhs, lhs <= constants.condK_rhs)


def check_condD(
    phi: TimeFunction, alpha: TimeFunction, a_h: float, params: Parameters, t_samples
) -> SampledVerdict:
    t = np.asarray(t_samples, dtype=float)
    drive = DriveValues(phi.value(t), phi.derivative(t), alpha.value(t))
    d_t = np.broadcast_to(boundary_work_rate(drive, a_h, params), t.shape).astype(float)
    return SampledVerdict(t, d_t, d_t < 0)


def condD_status(verdict: SampledVerdict) -> str:
    """``strict`` (d_t < 0 everywhere), ``boundary`` (d_t <= 0 with zeros), or ``violated``."""
    if verdict.overall:
        return "strict"
    if np.all(verdict.values <= 0):
        return "boundary"
    return "violated"


def check_drag_floor(b: TimeFunction, b0: float, t_samples) -> SampledVerdict:
    if not b0 > 0:
        raise ValueError("b0 must be positive")
    t = np.asarray(t_samples, dtype=float)
    vals = np.broadcast_to(b.value(t), t.shape).astype(float)
    return SampledVerdict(t, vals, vals >= b0)


@dataclass
class GrowthVerdict:
    m_below_half: bool
    n_below_minus_m: bool
    lambda_ok: bool
    lambda_bound: float
    remark_m_minus_n_negative: bool
    remark_m_negative: bool

    @property
    def theorem_ok(self) -> bool:
        return self.m_below_half and self.n_below_minus_m and self.lambda_ok

    @property
    def remark_ok(self) -> bool:
        return self.remark_m_minus_n_negative and self.remark_m_negative


def check_growth(spec: GrowthSpec, p: float) -> GrowthVerdict:
    bound = (p + 1.0 - spec.iota) / (p + 2.0)
    return GrowthVerdict(
        m_below_half=spec.m < 0.5,
        n_below_minus_m=spec.n < -spec.m,
        lambda_ok=spec.lam <= bound,
        lambda_bound=bound,
        remark_m_minus_n_negative=spec.m - spec.n < 0,
        remark_m_negative=spec.m < 0,
    )


@dataclass
class HypothesisReport:
    rigidity_ok: bool
    rigidity_error: str | None
    condK: SampledVerdict | None
    condD: SampledVerdict | None
    condD_status: str
    drag_floor: SampledVerdict
    growth: GrowthVerdict
    t_range: tuple[float, float]
    n_samples: int
    g3_nonpositive: bool
    summary: str
    notes: list[str] = field(default_factory=list)

    @property
    def condK_ok(self) -> bool:
        return self.condK is not None and self.condK.overall

    @property
    def condD_ok(self) -> bool:
        return self.condD is not None and self.condD.overall

    @property
    def drag_floor_ok(self) -> bool:
        return self.drag_floor.overall

    def flags(self) -> dict:
        g = self.growth
        return {
            "rigidity_ok": self.rigidity_ok,
            "condK_ok": self.condK_ok,
            "condD_ok": self.condD_ok,
            "drag_floor_ok": self.drag_floor_ok,
            "m_lt_half": g.m_below_half,
            "n_lt_minus_m": g.n_below_minus_m,
            "lambda_ok": g.lambda_ok,
            "remark_m_minus_n_lt_0": g.remark_m_minus_n_negative,
            "remark_m_lt_0": g.remark_m_negative,
        }

    def to_dict(self) -> dict:
        return {
            "summary": self.summary,
            "flags": self.flags(),
            "rigidity": {"ok": self.rigidity_ok, "error": self.rigidity_error},
            "condK": None if self.condK is None else self.condK.summary(),
            "condD": None if self.condD is None else {**self.condD.summary(), "status": self.condD_status},
            "drag_floor": self.drag_floor.summary(),
            "growth": {**asdict(self.growth), "theorem_ok": self.growth.theorem_ok, "remark_ok": self.growth.remark_ok},
            "sampled_time_range": list(self.t_range),
            "n_samples": self.n_samples,
            "g3_nonpositive": self.g3_nonpositive,
            "notes": list(self.notes),
        }


def classify(
    params: Parameters,
    tension: TensionProfile,
    b: TimeFunction,
    phi: TimeFunction,
    alpha: TimeFunction,
    growth: GrowthSpec,
    t_end: float,
    delta: float = 2.0,
    sigma: float | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> HypothesisReport:
    """Evaluate every hypothesis and summarise which guarantee applies.

    A failed rigidity condition is reported rather than raised; condK then
    has no meaning and is left unevaluated.
    """
    t = sample_times(t_end, n_samples)
    notes = []
    constants, rigidity_error = None, None
    try:
        constants = derive_constants(params, tension, delta, sigma)
    except RigidityViolated as exc:
        rigidity_error = str(exc)
    except SigmaTooSmall as exc:
        # condK does not involve sigma; keep k0 and flag the H-functional bound
        notes.append(f"H-functional bound unavailable: {exc}")
        k0 = params.k - 4.0 * tension.a_max_abs * params.h**2
        constants = AnalysisConstants(delta, math.nan, k0, math.nan, tension.a_max_abs, params.h, params.k)
    rigidity_ok = rigidity_error is None

    condK = check_condK(phi, alpha, constants, t) if constants is not None else None
    condD = check_condD(phi, alpha, tension.a_h, params, t)
    status = condD_status(condD)
    floor = check_drag_floor(b, params.b0, t)
    growth_verdict = check_growth(growth, params.p)
    g3_nonpositive = params.g3 <= 0
    if g3_nonpositive:
        notes.append("g3 <= 0: the standing assumption g3 > 0 does not hold (reported, not rejected)")
    if status == "boundary":
        notes.append("boundary case: d_t <= 0 with equality; E is still nonincreasing but the strict hypothesis fails")

    stable = rigidity_ok and condK is not None and condK.overall and status != "violated" and floor.overall
    if stable and growth_verdict.theorem_ok:
        summary = SUMMARY_THEOREM
    elif stable:
        summary = SUMMARY_LEMMA
    else:
        summary = SUMMARY_OUTSIDE
    return HypothesisReport(
        rigidity_ok=rigidity_ok,
        rigidity_error=rigidity_error,
        condK=condK,
        condD=condD,
        condD_status=status,
        drag_floor=floor,
        growth=growth_verdict,
        t_range=(float(t[0]), float(t[-1])),
        n_samples=int(t.size),
        g3_nonpositive=g3_nonpositive,
        summary=summary,
        notes=notes,
    )
