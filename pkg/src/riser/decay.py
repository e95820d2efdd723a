"""Tail decay-rate fits of E(t) and their comparison with the predicted bound."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .diagnostics import TimeSeries
from .errors import EnergyUnderflow, WindowTooSmall
from .model import GrowthSpec

MIN_WINDOW_RECORDS = 10
ENERGY_FLOOR_FRACTION = 1e-14


@dataclass(frozen=True)
class PredictedExponents:
    theorem: float
    proof: float
    terms_theorem: tuple[float, float, float, float]
    terms_proof: tuple[float, float, float, float]

    @property
    def discrepancy(self) -> bool:
        """True when -2/(p+1) versus -2/(p+2) changes the maximum."""
        return self.theorem != self.proof

    @property
    def vacuous(self) -> bool:
        """A non-negative exponent guarantees no decay."""
        return self.proof >= 0


def predicted_exponents(spec: GrowthSpec, p: float) -> PredictedExponents:
    """Upper-bound exponents for E(t) at large t.

    Both the exponent set stated with the theorem (last term -2/(p+1)) and
    the one its derivation produces (last term -2/(p+2)) are returned.
    """
    common = (spec.m + spec.n, 2.0 * spec.m - 1.0, -spec.iota / (p + 2.0))
    thm = common + (-2.0 / (p + 1.0),)
    prf = common + (-2.0 / (p + 2.0),)
    return PredictedExponents(max(thm), max(prf), thm, prf)


@dataclass
class DecayFit:
    fitted_exponent: float
    intercept: float
    residual: float
    t_start: float
    t_stop: float
    n_records: int
    predicted_exponent_theorem: float
    predicted_exponent_proof: float

    def to_dict(self) -> dict:
        return asdict(self)


def tail_window(t: np.ndarray, fraction: float = 0.5, t_min: float | None = None) -> np.ndarray:
    """Boolean mask of the last ``fraction`` of records with t >= max(1, t_end/10)."""
    if not 0 < fraction <= 1:
        raise ValueError("window fraction must be in (0, 1]")
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        return np.zeros(0, dtype=bool)
    lower = max(1.0, t[-1] / 10.0) if t_min is None else t_min
    eligible = np.flatnonzero(t >= lower)
    keep = eligible[eligible.size - int(np.ceil(fraction * eligible.size)) :]
    mask = np.zeros(t.size, dtype=bool)
    mask[keep] = True
    return mask


def fit_power_law(t, E) -> tuple[float, float, float]:
    """Least-squares slope, intercept and RMSE of log E against log t."""
    x = np.log(np.asarray(t, dtype=float))
    y = np.log(np.asarray(E, dtype=float))
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    rmse = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return float(slope), float(intercept), rmse


def fit_tail(
    series: TimeSeries,
    spec: GrowthSpec,
    p: float,
    fraction: float = 0.5,
    t_min: float | None = None,
    floor_fraction: float = ENERGY_FLOOR_FRACTION,
) -> DecayFit:
    t = series.t
    E = series.E
    mask = tail_window(t, fraction, t_min)
    if np.count_nonzero(mask) < MIN_WINDOW_RECORDS:
        raise WindowTooSmall(
            f"tail window holds {np.count_nonzero(mask)} records, need at least {MIN_WINDOW_RECORDS}"
        )
    floor = floor_fraction * E[0] if E[0] > 0 else 0.0
    if np.any(E[mask] <= floor):
        raise EnergyUnderflow(f"energy fell below the floor {floor:.3g} inside the fit window")
    slope, intercept, rmse = fit_power_law(t[mask], E[mask])
    pred = predicted_exponents(spec, p)
    return DecayFit(
        fitted_exponent=slope,
        intercept=intercept,
        residual=rmse,
        t_start=float(t[mask][0]),
        t_stop=float(t[mask][-1]),
        n_records=int(np.count_nonzero(mask)),
        predicted_exponent_theorem=pred.theorem,
        predicted_exponent_proof=pred.proof,
    )


@dataclass
class Verdict:
    passed: bool
    margin_proof: float | None
    margin_theorem: float | None
    tolerance: float
    note: str = ""

    @property
    def label(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {**asdict(self), "verdict": self.label}


def verdict(fit: DecayFit | EnergyUnderflow, tolerance: float) -> Verdict:
    """PASS when the fitted exponent does not exceed the proof exponent by more than ``tolerance``.

    Margins are ``predicted + tolerance - fitted``; positive means the run
    decays at least as fast as the bound allows.
    """
    if isinstance(fit, EnergyUnderflow):
        return Verdict(True, None, None, tolerance, note="decay exceeded measurement floor")
    margin_p = fit.predicted_exponent_proof + tolerance - fit.fitted_exponent
    margin_t = fit.predicted_exponent_theorem + tolerance - fit.fitted_exponent
    return Verdict(margin_p >= 0, margin_p, margin_t, tolerance)
