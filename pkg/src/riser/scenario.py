"""Scenario configuration: JSON schema, validation, defaults and object construction.

Unknown keys are rejected everywhere so that a typo in a
hypothesis-critical parameter cannot silently fall back to a default.
"""

from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .conditions import DEFAULT_SAMPLES, HypothesisReport, classify
from .diagnostics import CSV_COLUMNS, DiagnosticsRecord, TimeSeries, fingerprint
from .errors import ConfigError, NegativePhi, RigidityViolated, SigmaTooSmall
from .integrator import RiserProblem, RunConfig, Scenario, SchemeConfig
from .model import (
    AnalysisConstants,
    FieldState,
    GrowthSpec,
    Grid1D,
    Parameters,
    TensionProfile,
    TimeFunction,
    derive_constants,
)
from .cylinder import hermite_lift

SCHEMA_VERSION = 1

_DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "geometry": {"rho": 1.0, "h": 1.0, "N": 128},
    "physics": {
        "k": None,
        "p": 1.0,
        "g": [0.0, 0.0, 0.0],
        "b0": 1.0,
        "a": {"kind": "constant", "value": 1.0},
        "b": {"kind": "constant", "value": 1.0},
    },
    "drive": {
        "phi": {"kind": "constant", "value": 0.0},
        "alpha": {"kind": "constant", "value": 0.0},
    },
    "initial": {"u0": {"kind": "zero"}, "u1": {"kind": "zero"}},
    "time": {
        "t_end": None,
        "dt": "auto",
        "scheme": "newmark",
        "record_stride": 1,
        "checkpoint_stride": None,
        "coriolis": "implicit",
        "picard_tol": 1e-10,
        "picard_max_iters": 50,
    },
    "analysis": {
        "delta": 2.0,
        "sigma": "auto",
        "iota": 0.5,
        "growth": None,
        "fit_window_fraction": 0.5,
        "tolerance": 0.1,
        "condition_samples": DEFAULT_SAMPLES,
    },
}

_REQUIRED = (("physics", "k"), ("time", "t_end"))

_TIME_KEYS = {
    "constant": {"value"},
    "power": {"M", "e"},
    "decaying_sinusoid": {"M", "e", "omega"},
    "table": {"t", "values"},
}
_TENSION_KEYS = {"constant": {"value"}, "polynomial": {"coeffs"}, "table": {"z", "values"}}
_FIELD_KEYS = {
    "zero": set(),
    "quartic": {"amplitude"},
    "bump": {"center", "width", "amplitude"},
    "table": {"values"},
    "random": {"amplitude", "modes"},
}
_GROWTH_KEYS = {"m", "n", "lambda", "M1", "M2", "M3"}
SWEEP_AXES = ("m", "n", "lambda", "k", "b0")


def _reject_unknown(section: dict, allowed, where: str) -> None:
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) {extra} in {where}")


def _merge(defaults: dict, given: dict, where: str) -> dict:
    _reject_unknown(given, defaults, where)
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if isinstance(defaults.get(key), dict) and key not in ("a", "b", "phi", "alpha", "u0", "u1"):
            if not isinstance(val, dict):
                raise ConfigError(f"{where}.{key} must be an object")
            out[key] = _merge(defaults[key], val, f"{where}.{key}")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _check_kind(spec, table: dict, where: str, extra_keys=()) -> str:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{where} must be an object with a 'kind'")
    kind = spec["kind"]
    if kind not in table:
        raise ConfigError(f"{where}.kind={kind!r} is not one of {sorted(table)}")
    allowed = table[kind] | {"kind"} | set(extra_keys)
    _reject_unknown(spec, allowed, where)
    missing = sorted(table[kind] - set(spec) - ({"modes"} if kind == "random" else set()))
    if missing:
        raise ConfigError(f"{where} is missing {missing}")
    return kind


def time_function(spec: dict, where: str = "time function") -> TimeFunction:
    kind = _check_kind(spec, _TIME_KEYS, where)
    try:
        if kind == "constant":
            return TimeFunction.constant(spec["value"])
        if kind == "power":
            return TimeFunction.power(spec["M"], spec["e"])
        if kind == "decaying_sinusoid":
            return TimeFunction.decaying_sinusoid(spec["M"], spec["e"], spec["omega"])
        return TimeFunction.table(spec["t"], spec["values"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def tension_profile(spec: dict, h: float, N: int) -> TensionProfile:
    kind = _check_kind(spec, _TENSION_KEYS, "physics.a")
    try:
        if kind == "constant":
            return TensionProfile.constant(spec["value"], h, N)
        if kind == "polynomial":
            return TensionProfile.polynomial(spec["coeffs"], h, N)
        return TensionProfile.table(spec["z"], spec["values"], h, N)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"physics.a: {exc}") from exc


def _clamped_bubble(z: np.ndarray, h: float) -> np.ndarray:
    """s^2 (1-s)^2 scaled to unit peak, s = z/h."""
    s = z / h
    return 16.0 * s**2 * (1.0 - s) ** 2


def nodal_field(spec: dict, grid: Grid1D, rng: np.random.Generator, where: str, lift=None) -> np.ndarray:
    kind = _check_kind(spec, _FIELD_KEYS, where, extra_keys=("lift",) if lift is not None else ())
    z, h = grid.z, grid.h
    if kind == "zero":
        out = np.zeros_like(z)
    elif kind == "quartic":
        out = spec["amplitude"] * z**2 * (z - h) ** 2
    elif kind == "bump":
        c, w, amp = spec["center"], spec["width"], spec["amplitude"]
        if not w > 0:
            raise ConfigError(f"{where}.width must be positive")
        inside = np.abs(z - c) < 0.5 * w
        out = np.where(inside, amp * np.sin(math.pi * (z - c + 0.5 * w) / w) ** 2, 0.0)
    elif kind == "table":
        out = np.asarray(spec["values"], dtype=float)
        if out.shape != z.shape:
            raise ConfigError(f"{where}.values needs {z.size} nodal entries, got {out.size}")
    else:
        modes = int(spec.get("modes", 3))
        coeffs = rng.uniform(-1.0, 1.0, modes)
        basis = _clamped_bubble(z, h)
        out = spec["amplitude"] * basis * np.polynomial.polynomial.polyval(z / h, coeffs)
    if lift is not None and spec.get("lift", False):
        out = out + hermite_lift(lift[0], lift[1], h)(z)
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"{where} produced non-finite values")
    return out


def _check_compatibility(u0: np.ndarray, grid: Grid1D, phi0: float, alpha0: float) -> None:
    dz = grid.dz
    slope_top = (3.0 * u0[-1] - 4.0 * u0[-2] + u0[-3]) / (2.0 * dz)
    slope_bottom = (-3.0 * u0[0] + 4.0 * u0[1] - u0[2]) / (2.0 * dz)
    problems = []
    if abs(u0[0]) > 1e-12 * (1.0 + np.max(np.abs(u0))):
        problems.append(f"u0(0)={u0[0]:.6g} must be 0")
    if abs(u0[-1] - phi0) > 1e-9 * (1.0 + abs(phi0)):
        problems.append(f"u0(h)={u0[-1]:.6g} must equal phi(0)={phi0:.6g}")
    if abs(slope_top - alpha0) > dz * (1.0 + abs(alpha0)):
        problems.append(f"u0'(h)~{slope_top:.6g} must match alpha(0)={alpha0:.6g} within dz")
    if abs(slope_bottom) > dz * (1.0 + abs(alpha0)):
        problems.append(f"u0'(0)~{slope_bottom:.6g} must vanish within dz")
    if problems:
        raise ConfigError(
            "initial displacement is incompatible with the boundary data: "
            + "; ".join(problems)
            + " (set \"lift\": true to add the boundary interpolant)"
        )


def _infer_growth(cfg: dict, phi: TimeFunction, alpha: TimeFunction, b: TimeFunction) -> dict:
    given = cfg["analysis"]["growth"] or {}
    _reject_unknown(given, _GROWTH_KEYS, "analysis.growth")
    out = {}
    for key, fn, const in (("m", phi, "M1"), ("n", alpha, "M2"), ("lambda", b, "M3")):
        if key in given:
            out[key] = float(given[key])
        elif fn.exponent is not None:
            out[key] = float(fn.exponent)
        else:
            raise ConfigError(f"analysis.growth.{key} is required for a tabulated time function")
        amp = abs(fn.M) if fn.kind != "table" else float(np.max(np.abs(fn.values)))
        out[const] = float(given.get(const, amp if amp > 0 else 1.0))
    return out


def resolve_config(raw: dict) -> dict:
    """Merge defaults, reject unknown keys, and check required fields."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    raw = dict(raw)
    sweep = raw.pop("sweep", None)
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
    cfg = _merge(_DEFAULTS, raw, "config")
    for section, key in _REQUIRED:
        if cfg[section][key] is None:
            raise ConfigError(f"{section}.{key} is required")
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise ConfigError("sweep must be an object")
        _reject_unknown(sweep, {"axes"}, "sweep")
        axes = sweep.get("axes", {})
        _reject_unknown(axes, SWEEP_AXES, "sweep.axes")
        for name, values in axes.items():
            if not isinstance(values, list) or not values:
                raise ConfigError(f"sweep.axes.{name} must be a non-empty list")
        cfg["sweep"] = {"axes": axes}
    return cfg


@dataclass
class ResolvedScenario:
    config: dict
    scenario: Scenario
    growth: GrowthSpec
    constants: AnalysisConstants | None
    delta: float
    fit_window_fraction: float
    tolerance: float
    condition_samples: int

    @property
    def problem(self) -> RiserProblem:
        return self.scenario.problem

    def classify(self) -> HypothesisReport:
        pb = self.problem
        return classify(
            pb.params,
            pb.tension,
            pb.b,
            pb.phi,
            pb.alpha,
            self.growth,
            self.scenario.run.t_end,
            delta=self.delta,
            sigma=None if self.config["analysis"]["sigma"] == "auto" else float(self.config["analysis"]["sigma"]),
            n_samples=self.condition_samples,
        )


def build(raw: dict, strict: bool = True) -> ResolvedScenario:
    """Validate a raw config dict and construct every runtime object.

    Raises ConfigError on invalid input. With ``strict`` a rigidity failure
    (RigidityViolated) is an error too; otherwise ``constants`` is None so
    that the scenario can still be classified. ``config`` on the result has
    every default materialised.
    """
    cfg = resolve_config(raw)
    geo, phys, drv, ini, tim, ana = (cfg[k] for k in ("geometry", "physics", "drive", "initial", "time", "analysis"))
    try:
        grid = Grid1D(float(geo["h"]), int(geo["N"]))
        params = Parameters(
            k=float(phys["k"]),
            p=float(phys["p"]),
            g=tuple(phys["g"]),
            rho=float(geo["rho"]),
            h=float(geo["h"]),
            b0=float(phys["b0"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    tension = tension_profile(phys["a"], grid.h, grid.N)
    b = time_function(phys["b"], "physics.b")
    phi = time_function(drv["phi"], "drive.phi")
    alpha = time_function(drv["alpha"], "drive.alpha")
    if phi.kind in ("power", "decaying_sinusoid", "constant") and phi.M < 0:
        raise ConfigError("drive.phi must be non-negative (radial top displacement)")
    if phi.kind == "table" and min(phi.values) < 0:
        raise NegativePhi("drive.phi table contains negative values")

    growth_cfg = _infer_growth(cfg, phi, alpha, b)
    ana["growth"] = growth_cfg
    try:
        growth = GrowthSpec(
            m=growth_cfg["m"],
            n=growth_cfg["n"],
            lam=growth_cfg["lambda"],
            iota=float(ana["iota"]),
            M1=growth_cfg["M1"],
            M2=growth_cfg["M2"],
            M3=growth_cfg["M3"],
        )
    except ValueError as exc:
        raise ConfigError(f"analysis: {exc}") from exc

    sigma = None if ana["sigma"] == "auto" else float(ana["sigma"])
    try:
        constants = derive_constants(params, tension, float(ana["delta"]), sigma)
    except RigidityViolated:
        if strict:
            raise
        constants = None
    except SigmaTooSmall:
        # a == 0 leaves no admissible sigma; only an explicit bad sigma is an error
        if strict and sigma is not None:
            raise
        k0 = params.k - 4.0 * tension.a_max_abs * params.h**2
        constants = AnalysisConstants(float(ana["delta"]), math.nan, k0, math.nan, tension.a_max_abs, params.h, params.k)
    except ValueError as exc:
        raise ConfigError(f"analysis: {exc}") from exc

    rng = np.random.default_rng(int(cfg["seed"]))
    phi0, alpha0 = float(phi.value(0.0)), float(alpha.value(0.0))
    u0 = nodal_field(ini["u0"], grid, rng, "initial.u0", lift=(phi0, alpha0))
    u1 = nodal_field(ini["u1"], grid, rng, "initial.u1")
    _check_compatibility(u0, grid, phi0, alpha0)

    try:
        scheme = SchemeConfig(
            scheme=tim["scheme"],
            dt=tim["dt"],
            picard_tol=float(tim["picard_tol"]),
            picard_max_iters=int(tim["picard_max_iters"]),
            coriolis=tim["coriolis"],
        )
        run_cfg = RunConfig(
            t_end=float(tim["t_end"]),
            record_stride=int(tim["record_stride"]),
            checkpoint_stride=None if tim["checkpoint_stride"] is None else int(tim["checkpoint_stride"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"time: {exc}") from exc
    frac = float(ana["fit_window_fraction"])
    if not 0 < frac <= 1:
        raise ConfigError("analysis.fit_window_fraction must be in (0, 1]")

    problem = RiserProblem(grid, params, tension, b, phi, alpha)
    scenario = Scenario(
        problem=problem,
        initial=FieldState(u0, u1, 0.0),
        scheme=scheme,
        run=run_cfg,
        sigma=math.nan if constants is None else constants.sigma,
        fingerprint=fingerprint(cfg),
    )
    return ResolvedScenario(
        config=cfg,
        scenario=scenario,
        growth=growth,
        constants=constants,
        delta=float(ana["delta"]),
        fit_window_fraction=frac,
        tolerance=float(ana["tolerance"]),
        condition_samples=int(ana["condition_samples"]),
    )


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc


def apply_sweep_point(raw: dict, point: dict) -> dict:
    """Copy of ``raw`` with sweep-axis values written into drive, physics and growth."""
    cfg = copy.deepcopy(raw)
    cfg.pop("sweep", None)
    physics = cfg.setdefault("physics", {})
    drive = cfg.setdefault("drive", {})
    growth = cfg.setdefault("analysis", {}).get("growth") or {}
    targets = {"m": (drive, "phi"), "n": (drive, "alpha"), "lambda": (physics, "b")}
    for name, value in point.items():
        if name in ("k", "b0"):
            physics[name] = value
            continue
        section, key = targets[name]
        spec = section.get(key) or copy.deepcopy(_DEFAULTS["drive" if key != "b" else "physics"][key])
        if spec.get("kind") in ("power", "decaying_sinusoid"):
            spec = {**spec, "e": value}
        section[key] = spec
        growth[name] = value
    if growth:
        cfg["analysis"]["growth"] = growth
    return cfg


# --- CSV -------------------------------------------------------------------


def write_series_csv(series: TimeSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in series.records:
            writer.writerow([format(x, ".17g") for x in rec.row()])


def read_series_csv(path) -> TimeSeries:
    """Parse a series CSV; raises ConfigError when malformed."""
    series = TimeSeries()
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ConfigError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(CSV_COLUMNS):
                    raise ConfigError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields")
                series.append(DiagnosticsRecord(*(float(x) for x in row)))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc
    return series


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False, default=_json_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
