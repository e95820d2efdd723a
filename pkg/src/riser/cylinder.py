"""Quadrature checks of the three preliminary inequalities on a 3D cylinder.

Test fields depend on depth only. The top Dirichlet value is uniform over
the top face, so a separable radial factor would have to be constant;
depth-only fields still produce every boundary term (top flux
pi rho^2 phi alpha, zero lateral and bottom flux).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

N_FREE = 3
REL_SLACK = 1e-9


@dataclass(frozen=True)
class CylinderGrid:
    rho: float = 1.0
    h: float = 1.0
    Nr: int = 16
    Nphi: int = 8
    Nz: int = 128

    def __post_init__(self):
        if self.Nr < 16 or self.Nz < 16:
            raise ValueError("CylinderGrid needs Nr, Nz >= 16")
        if self.Nphi < 8:
            raise ValueError("CylinderGrid needs Nphi >= 8")
        if not (self.rho > 0 and self.h > 0):
            raise ValueError("rho and h must be positive")

    def coarsened(self) -> CylinderGrid:
        """Same grid with roughly half the depth intervals."""
        return CylinderGrid(self.rho, self.h, self.Nr, self.Nphi, max(16, (self.Nz - 1) // 2 + 1))

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.rho, self.Nr)

    @property
    def phi(self) -> np.ndarray:
        return np.arange(self.Nphi) * (2.0 * math.pi / self.Nphi)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, self.h, self.Nz)

    @property
    def dz(self) -> float:
        return self.h / (self.Nz - 1)


def _trapezoid_weights(n: int, length: float) -> np.ndarray:
    w = np.full(n, length / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def volume_weights(grid: CylinderGrid) -> np.ndarray:
    """Weights for r dr dphi dz: trapezoid in r and z, periodic rule in phi."""
    wr = _trapezoid_weights(grid.Nr, grid.rho) * grid.r
    wphi = np.full(grid.Nphi, 2.0 * math.pi / grid.Nphi)
    wz = _trapezoid_weights(grid.Nz, grid.h)
    return wr[:, None, None] * wphi[None, :, None] * wz[None, None, :]


def cyl_integrate(func, grid: CylinderGrid) -> float:
    """Integrate ``func(r, phi, z)`` over the cylinder (arguments broadcast 3D)."""
    R, PH, Z = np.meshgrid(grid.r, grid.phi, grid.z, indexing="ij")
    vals = np.broadcast_to(func(R, PH, Z), R.shape)
    return float(np.sum(volume_weights(grid) * vals))


@dataclass(frozen=True)
class AdmissibleField:
    """u(r, phi, z) = P(z) with P(0) = P'(0) = 0, P(h) = phi0, P'(h) = alpha0."""

    P: Polynomial
    phi0: float
    alpha0: float
    h: float
    coeffs: tuple[float, ...] = ()

    @property
    def dP(self) -> Polynomial:
        return self.P.deriv()

    @property
    def d2P(self) -> Polynomial:
        return self.P.deriv(2)

    def integrand(self, which: str):
        """Depth profile of u^2, |grad u|^2 or |lap u|^2."""
        poly = {"u2": self.P, "grad2": self.dP, "lap2": self.d2P}[which]
        return lambda z: poly(z) ** 2


def hermite_lift(phi0: float, alpha0: float, h: float) -> Polynomial:
    """Cubic with zero value and slope at 0, value phi0 and slope alpha0 at h."""
    s = Polynomial([0.0, 1.0 / h])
    value_basis = 3.0 * s**2 - 2.0 * s**3
    slope_basis = h * (s**3 - s**2)
    return phi0 * value_basis + alpha0 * slope_basis


def gen_admissible(seed, phi0: float, alpha0: float, h: float, coeffs=None) -> AdmissibleField:
    """Hermite lift plus free part z^2 (z-h)^2 (c0 + c1 z + c2 z^2), degree <= 6.

    Free coefficients are uniform on [-1, 1] from ``seed`` unless ``coeffs``
    is given.
    """
    if phi0 < 0:
        raise ValueError("phi0 must be non-negative")
    if coeffs is None:
        coeffs = np.random.default_rng(seed).uniform(-1.0, 1.0, N_FREE)
    coeffs = tuple(float(c) for c in coeffs)
    bubble = Polynomial([0.0, 0.0, 1.0]) * Polynomial([-h, 1.0]) ** 2
    free = bubble * Polynomial(list(coeffs) or [0.0])
    P = hermite_lift(phi0, alpha0, h) + free
    return AdmissibleField(P, float(phi0), float(alpha0), float(h), coeffs)


def cyl_quad(fld: AdmissibleField, grid: CylinderGrid, which: str) -> float:
    """Full 3D trapezoid quadrature of u^2, |grad u|^2 or |lap u|^2."""
    f = fld.integrand(which)
    return cyl_integrate(lambda r, ph, z: f(z), grid)


def reduced_quad(fld: AdmissibleField, grid: CylinderGrid, which: str) -> float:
    """pi rho^2 times the depth trapezoid; equals :func:`cyl_quad` for depth-only fields."""
    vals = fld.integrand(which)(grid.z)
    return math.pi * grid.rho**2 * float(np.dot(_trapezoid_weights(grid.Nz, grid.h), vals))


def _with_error(fld, grid, which):
    """Quadrature value and a Richardson estimate of its depth-discretization error."""
    fine = cyl_quad(fld, grid, which)
    coarse_grid = grid.coarsened()
    coarse = cyl_quad(fld, coarse_grid, which)
    hf, hc = grid.dz**2, coarse_grid.dz**2
    err = abs(fine - coarse) * hf / (hc - hf) if hc > hf else 0.0
    return fine, err


@dataclass
class CorollaryCheck:
    lhs: float
    rhs: float
    holds: bool
    quad_error: float
    beyond_quadrature: bool
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs


def _judge(lhs, rhs, err, extra=None) -> CorollaryCheck:
    holds = lhs <= rhs * (1.0 + REL_SLACK) if rhs >= 0 else lhs <= rhs * (1.0 - REL_SLACK)
    beyond = lhs - rhs > REL_SLACK * abs(rhs) + err
    return CorollaryCheck(lhs, rhs, bool(holds), err, bool(beyond), extra or {})


def check_corollary1(fld: AdmissibleField, grid: CylinderGrid) -> CorollaryCheck:
    """int u^2 <= 4 h^2 (int |grad u|^2 + pi rho^2 phi^2)."""
    area = math.pi * grid.rho**2
    u2, e1 = _with_error(fld, grid, "u2")
    g2, e2 = _with_error(fld, grid, "grad2")
    rhs = 4.0 * grid.h**2 * (g2 + area * fld.phi0**2)
    return _judge(u2, rhs, e1 + 4.0 * grid.h**2 * e2)


def check_corollary2(fld: AdmissibleField, grid: CylinderGrid) -> CorollaryCheck:
    """int |grad u|^2 <= q + 4 h^2 int |lap u|^2 with the signed q = pi rho^2 (2 phi alpha + phi^2).

    ``extra['rhs_abs']`` holds the right side with |alpha|, the form the
    later energy bounds use; ``extra['beyond_abs_form']`` flags a violation
    of that weaker form.
    """
    area = math.pi * grid.rho**2
    g2, e1 = _with_error(fld, grid, "grad2")
    l2, e2 = _with_error(fld, grid, "lap2")
    q = area * (2.0 * fld.phi0 * fld.alpha0 + fld.phi0**2)
    q_abs = area * (2.0 * fld.phi0 * abs(fld.alpha0) + fld.phi0**2)
    err = e1 + 4.0 * grid.h**2 * e2
    rhs = q + 4.0 * grid.h**2 * l2
    rhs_abs = q_abs + 4.0 * grid.h**2 * l2
    beyond_abs = g2 - rhs_abs > REL_SLACK * abs(rhs_abs) + err
    return _judge(g2, rhs, err, {"q": q, "rhs_abs": rhs_abs, "beyond_abs_form": bool(beyond_abs)})


def check_corollary3(fld: AdmissibleField, grid: CylinderGrid) -> CorollaryCheck:
    """pi rho^2 alpha^2 / h <= int |lap u|^2."""
    area = math.pi * grid.rho**2
    l2, err = _with_error(fld, grid, "lap2")
    return _judge(area * fld.alpha0**2 / grid.h, l2, err)


def verify_suite(n_fields: int, seed: int, grid: CylinderGrid, alpha_sign: str = "any") -> dict:
    """Randomised corollary checks over ``n_fields`` admissible fields.

    phi0 ~ U[0, 1]; alpha0 ~ U[-2, 2] (or U[-2, 0) with ``alpha_sign='negative'``).
    Only violations beyond the quadrature-error estimate count as failures;
    for the gradient estimate, a failure must also break the |alpha| form.
    """
    if alpha_sign not in ("any", "negative"):
        raise ValueError("alpha_sign must be 'any' or 'negative'")
    rng = np.random.default_rng(seed)
    violations = []
    max_ratio = {"corollary1": 0.0, "corollary2": 0.0, "corollary3": 0.0}
    signed_form_failures = 0
    for i in range(n_fields):
        phi0 = float(rng.uniform(0.0, 1.0))
        alpha0 = float(rng.uniform(-2.0, 0.0 if alpha_sign == "negative" else 2.0))
        fld = gen_admissible(None, phi0, alpha0, grid.h, coeffs=rng.uniform(-1.0, 1.0, N_FREE))
        checks = {
            "corollary1": check_corollary1(fld, grid),
            "corollary2": check_corollary2(fld, grid),
            "corollary3": check_corollary3(fld, grid),
        }
        for name, chk in checks.items():
            max_ratio[name] = max(max_ratio[name], chk.ratio)
            if chk.holds:
                continue
            fatal = chk.beyond_quadrature
            if name == "corollary2":
                signed_form_failures += 1
                fatal = chk.extra["beyond_abs_form"]
            violations.append(
                {
                    "field": i,
                    "corollary": name,
                    "lhs": chk.lhs,
                    "rhs": chk.rhs,
                    "quad_error": chk.quad_error,
                    "fatal": bool(fatal),
                    "phi0": phi0,
                    "alpha0": alpha0,
                    "coeffs": list(fld.coeffs),
                }
            )
    eq = equality_case(grid)
    return {
        "fields_tested": n_fields,
        "seed": seed,
        "grid": asdict(grid),
        "alpha_sign": alpha_sign,
        "violations": violations,
        "fatal_violations": sum(v["fatal"] for v in violations),
        "signed_form_corollary2_failures": signed_form_failures,
        "max_lhs_over_rhs": max_ratio,
        "equality_case_corollary3": eq,
    }


def equality_case(grid: CylinderGrid) -> dict:
    """P = z^2: constant Laplacian, the field for which the slope bound is an equality."""
    h = grid.h
    P = Polynomial([0.0, 0.0, 1.0])
    fld = AdmissibleField(P, float(P(h)), float(P.deriv()(h)), h)
    chk = check_corollary3(fld, grid)
    return {"lhs": chk.lhs, "rhs": chk.rhs, "ratio": chk.ratio}
