"""Finite-difference operators on the depth grid.

Neumann data enter through one mirrored ghost node per end:

    bottom:  u[-1]  = u[1]                  (u_z(0) = 0)
    top:     u[N+1] = u[N-1] + 2 dz alpha   (u_z(h) = alpha)

The biharmonic operator is the second difference of the ghost-extended
second difference, which makes ``k * sum(w * uzz**2)`` (trapezoid weights)
its exact discrete energy. The lateral condition on the Laplacian has no
counterpart on the axis: u(0) = u_z(0) = 0, u(h) = phi, u_z(h) = alpha
already determine the fourth-order 1D problem.

Only g3 acts in 1D: for depth-only fields grad(u_t) has no transverse part.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .errors import NonFinite
from .model import Grid1D, Parameters, TensionProfile, TimeFunction


def first_derivative(f: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Second-order centered differences; second-order one-sided at the ends."""
    dz = grid.dz
    out = np.empty_like(f, dtype=float)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dz)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dz)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dz)
    return out


def midpoint_tension(a: TensionProfile | np.ndarray, grid: Grid1D) -> np.ndarray:
    """a(z) at the N cell midpoints; arrays pass through unchanged."""
    if isinstance(a, TensionProfile):
        return np.asarray(a(grid.z_mid), dtype=float)
    a_mid = np.asarray(a, dtype=float)
    if a_mid.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} midpoint tension values, got shape {a_mid.shape}")
    return a_mid


def tension_divergence(u: np.ndarray, a: TensionProfile | np.ndarray, grid: Grid1D) -> np.ndarray:
    """Flux form (a u_z)_z at interior nodes, zero at the two end nodes."""
    a_mid = midpoint_tension(a, grid)
    flux = a_mid * np.diff(u)
    out = np.zeros_like(u, dtype=float)
    out[1:-1] = (flux[1:] - flux[:-1]) / grid.dz**2
    return out


def second_difference(u: np.ndarray, grid: Grid1D, alpha: float) -> np.ndarray:
    """u_zz at all N+1 nodes, end values taken through the ghost nodes."""
    dz2 = grid.dz**2
    out = np.empty_like(u, dtype=float)
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / dz2
    out[0] = (2.0 * u[1] - 2.0 * u[0]) / dz2
    out[-1] = (2.0 * u[-2] - 2.0 * u[-1] + 2.0 * grid.dz * alpha) / dz2
    return out


def biharmonic(u: np.ndarray, grid: Grid1D, alpha: float) -> np.ndarray:
    """Five-point u_zzzz at interior nodes; boundary entries are zero.

    ``u`` must already carry u[0] = 0 and u[N] = phi; ``alpha`` is the top
    slope.
    """
    uzz = second_difference(u, grid, alpha)
    out = np.zeros_like(u, dtype=float)
    out[1:-1] = (uzz[:-2] - 2.0 * uzz[1:-1] + uzz[2:]) / grid.dz**2
    return out


def drag_force(v: np.ndarray, b: float, p: float) -> np.ndarray:
    """b |v|^p v; exactly zero where v is zero."""
    return b * np.power(np.abs(v), p) * v


def acceleration(
    u: np.ndarray,
    v: np.ndarray,
    t: float,
    grid: Grid1D,
    params: Parameters,
    a: TensionProfile | np.ndarray,
    b: TimeFunction,
    alpha: float,
    source=None,
) -> np.ndarray:
    """u_tt from the riser equation at interior nodes, zero at the ends.

    ``source(z, t)`` is an optional forcing added to the right-hand side,
    used for manufactured solutions.
    """
    out = -params.k * biharmonic(u, grid, alpha)
    out += tension_divergence(u, a, grid)
    if params.g3 != 0.0:
        out -= params.g3 * first_derivative(v, grid)
    out -= drag_force(v, float(b.value(t)), params.p)
    if source is not None:
        out += source(grid.z, t)
    out[0] = 0.0
    out[-1] = 0.0
    if not np.all(np.isfinite(out)):
        raise NonFinite(f"non-finite acceleration at t={t:.6g}")
    return out


def stiffness_bands(grid: Grid1D, k: float, a_mid: np.ndarray) -> np.ndarray:
    """Banded (lower=2, upper=2) matrix of k*D4 - D(a D) on interior nodes.

    Homogeneous boundary data; rows and columns are nodes 1..N-1. Layout
    follows :func:`scipy.linalg.solve_banded` (``ab[2 + i - j, j]``).
    """
    n = grid.N - 1
    dz = grid.dz
    ab = np.zeros((5, n))
    main = np.full(n, 6.0)
    main[0] = main[-1] = 7.0
    ab[2] = k * main / dz**4
    ab[1, 1:] = ab[3, :-1] = -4.0 * k / dz**4
    ab[0, 2:] = ab[4, :-2] = k / dz**4
    # tension: -(a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})) / dz^2
    ab[2] += (a_mid[1:] + a_mid[:-1]) / dz**2
    off = -a_mid[1:-1] / dz**2
    ab[1, 1:] += off
    ab[3, :-1] += off
    return ab


def banded_matvec(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = A x for a (2, 2)-banded matrix in solve_banded layout."""
    n = x.size
    y = ab[2] * x
    y[:-1] += ab[1, 1:] * x[1:]
    y[:-2] += ab[0, 2:] * x[2:]
    y[1:] += ab[3, :-1] * x[:-1]
    y[2:] += ab[4, :-2] * x[:-2]
    return y[:n]


def solve_static(grid: Grid1D, params: Parameters, a, rhs: np.ndarray, phi=0.0, alpha=0.0) -> np.ndarray:
    """Nodal solution of k u'''' - (a u')' = rhs with the riser boundary data."""
    a_mid = midpoint_tension(a, grid)
    ab = stiffness_bands(grid, params.k, a_mid)
    lift = np.zeros(grid.N + 1)
    lift[-1] = phi
    # boundary contribution of (phi, alpha) moves to the right-hand side
    load = rhs - (params.k * biharmonic(lift, grid, alpha) - tension_divergence(lift, a_mid, grid))
    u = lift.copy()
    u[1:-1] = solve_banded((2, 2), ab, load[1:-1])
    return u
