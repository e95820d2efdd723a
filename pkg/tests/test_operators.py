import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from riser.diagnostics import quad_1d
from riser.errors import NonFinite
from riser.model import Grid1D, Parameters, TensionProfile, TimeFunction
from riser.operators import (
    acceleration,
    banded_matvec,
    biharmonic,
    drag_force,
    first_derivative,
    midpoint_tension,
    second_difference,
    solve_static,
    stiffness_bands,
    tension_divergence,
)


def order(errors):
    return [math.log2(e0 / e1) for e0, e1 in zip(errors, errors[1:])]


class TestFirstDerivative:
    def test_exact_on_quadratic(self):
        g = Grid1D(1.0, 8)
        d = first_derivative(g.z**2, g)
        assert d[4] == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(d, 2 * g.z, atol=1e-12)

    def test_constant_gives_zero(self):
        g = Grid1D(1.0, 16)
        assert np.all(first_derivative(np.full(17, 3.0), g) == 0.0)

    def test_error_quarters_on_doubling(self):
        errs = []
        for N in (32, 64):
            g = Grid1D(1.0, N)
            errs.append(np.max(np.abs(first_derivative(np.sin(np.pi * g.z), g) - np.pi * np.cos(np.pi * g.z))))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


class TestTensionDivergence:
    def test_unit_tension_is_second_difference(self):
        g = Grid1D(1.0, 10)
        out = tension_divergence(g.z**2, TensionProfile.constant(1.0, 1.0), g)
        np.testing.assert_allclose(out[1:-1], 2.0, rtol=1e-12)
        assert out[0] == out[-1] == 0.0

    def test_linear_flux(self):
        g = Grid1D(1.0, 10)
        out = tension_divergence(g.z, TensionProfile.polynomial([0.0, 1.0], 1.0), g)
        np.testing.assert_allclose(out[1:-1], 1.0, rtol=1e-12)

    def test_second_order_convergence(self):
        a = TensionProfile.polynomial([1.0, 1.0], 1.0)
        errs = []
        for N in (16, 32, 64, 128):
            g = Grid1D(1.0, N)
            z = g.z
            exact = np.pi * np.cos(np.pi * z) - (1 + z) * np.pi**2 * np.sin(np.pi * z)
            errs.append(np.max(np.abs(tension_divergence(np.sin(np.pi * z), a, g) - exact)[1:-1]))
        assert all(1.8 <= o <= 2.2 for o in order(errs))

    def test_midpoint_array_shape_checked(self):
        with pytest.raises(ValueError):
            midpoint_tension(np.ones(3), Grid1D(1.0, 8))


class TestBiharmonic:
    def test_quadratic_has_zero_fourth_derivative(self):
        g = Grid1D(1.0, 16)
        out = biharmonic(g.z**2, g, alpha=2.0)
        np.testing.assert_allclose(out, 0.0, atol=1e-7)

    def test_quartic_interior_value(self):
        g = Grid1D(1.0, 16)
        out = biharmonic(g.z**4, g, alpha=4.0)
        np.testing.assert_allclose(out[2:-2], 24.0, rtol=1e-9)

    def test_static_solve_converges_at_second_order(self):
        # k u'''' = 24 k with u = z^2 (z-1)^2 and homogeneous data
        params = Parameters(k=1.0)
        a = TensionProfile.constant(0.0, 1.0)
        errs = []
        for N in (16, 32, 64, 128):
            g = Grid1D(1.0, N)
            u = solve_static(g, params, a, np.full(N + 1, 24.0))
            errs.append(np.max(np.abs(u - g.z**2 * (g.z - 1) ** 2)))
        assert all(1.8 <= o <= 2.2 for o in order(errs))

    def test_static_solve_with_boundary_data_and_tension(self):
        # u = 1 - cos(pi z) + z^2, phi = 3, alpha = 2, a = 1 + z
        params = Parameters(k=2.0)
        a = TensionProfile.polynomial([1.0, 1.0], 1.0)
        errs = []
        for N in (16, 32, 64):
            g = Grid1D(1.0, N)
            z = g.z
            u4 = -np.pi**4 * np.cos(np.pi * z)
            u1 = np.pi * np.sin(np.pi * z) + 2 * z
            u2 = np.pi**2 * np.cos(np.pi * z) + 2
            rhs = 2.0 * u4 - (u1 + (1 + z) * u2)
            u = solve_static(g, params, a, rhs, phi=3.0, alpha=2.0)
            errs.append(np.max(np.abs(u - (1 - np.cos(np.pi * z) + z**2))))
        assert all(1.8 <= o <= 2.2 for o in order(errs))

    def test_summation_by_parts(self, rng):
        # sum_interior (D4 u) w dz equals the trapezoid pairing of second differences
        g = Grid1D(1.0, 20)
        u, w = (np.concatenate(([0.0], rng.normal(size=19), [0.0])) for _ in range(2))
        lhs = g.dz * np.dot(biharmonic(u, g, 0.0)[1:-1], w[1:-1])
        rhs = quad_1d(second_difference(u, g, 0.0) * second_difference(w, g, 0.0), g)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(
        u1=arrays(np.float64, 17, elements=st.floats(-1, 1)),
        u2=arrays(np.float64, 17, elements=st.floats(-1, 1)),
        a1=st.floats(-2, 2),
        a2=st.floats(-2, 2),
        c=st.floats(-3, 3),
    )
    def test_linear_in_field_and_slope(self, u1, u2, a1, a2, c):
        g = Grid1D(1.0, 16)
        lhs = biharmonic(u1 + c * u2, g, a1 + c * a2)
        rhs = biharmonic(u1, g, a1) + c * biharmonic(u2, g, a2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-6 * (1 + np.max(np.abs(rhs))))


class TestStiffness:
    def test_bands_match_operators(self, rng):
        g = Grid1D(1.0, 12)
        a = TensionProfile.polynomial([1.0, -0.3], 1.0)
        a_mid = midpoint_tension(a, g)
        u = np.concatenate(([0.0], rng.normal(size=11), [0.0]))
        expected = 3.0 * biharmonic(u, g, 0.0) - tension_divergence(u, a_mid, g)
        got = banded_matvec(stiffness_bands(g, 3.0, a_mid), u[1:-1])
        np.testing.assert_allclose(got, expected[1:-1], rtol=1e-10, atol=1e-6)


class TestDrag:
    @settings(max_examples=50, deadline=None)
    @given(
        v=arrays(np.float64, 9, elements=st.floats(-10, 10)),
        b=st.floats(0, 5),
        p=st.floats(1, 4),
    )
    def test_dissipative(self, v, b, p):
        assert np.all(v * drag_force(v, b, p) >= 0)

    def test_odd(self):
        v = np.array([-2.0, 0.0, 2.0])
        np.testing.assert_array_equal(drag_force(v, 1.5, 2.0), [-12.0, 0.0, 12.0])


class TestAcceleration:
    def setup_method(self):
        self.grid = Grid1D(1.0, 16)
        self.b = TimeFunction.constant(1.0)

    def test_equilibrium(self):
        z = np.zeros(17)
        out = acceleration(z, z, 0.0, self.grid, Parameters(k=1.0, g=(0, 0, 1)), TensionProfile.constant(1.0, 1.0), self.b, 0.0)
        assert np.all(out == 0.0)

    def test_drag_only(self):
        c = 0.7
        v = np.full(17, c)
        v[0] = v[-1] = 0.0
        out = acceleration(np.zeros(17), v, 0.0, self.grid, Parameters(k=1.0), TensionProfile.constant(0.0, 1.0), self.b, 0.0)
        np.testing.assert_allclose(out[1:-1], -c * c)

    def test_sum_of_terms(self, rng):
        g, z = self.grid, self.grid.z
        params = Parameters(k=2.0, p=1.5, g=(0.0, 0.0, 0.4))
        a = TensionProfile.polynomial([1.0, 0.5], 1.0)
        b = TimeFunction.power(2.0, 0.5)
        u = np.sin(2 * z) * z**2 + 0.01 * rng.normal(size=17)
        u[0] = 0.0
        v = np.cos(3 * z) * z
        t, alpha = 0.8, 0.3
        expected = (
            -2.0 * biharmonic(u, g, alpha)
            + tension_divergence(u, a, g)
            - 0.4 * first_derivative(v, g)
            - drag_force(v, b.value(t), 1.5)
        )
        out = acceleration(u, v, t, g, params, a, b, alpha)
        np.testing.assert_allclose(out[1:-1], expected[1:-1], rtol=1e-13)
        assert out[0] == out[-1] == 0.0

    def test_non_finite_raises(self):
        u = np.zeros(17)
        u[5] = np.inf
        with pytest.raises(NonFinite):
            acceleration(u, np.zeros(17), 0.0, self.grid, Parameters(k=1.0), TensionProfile.constant(1.0, 1.0), self.b, 0.0)
