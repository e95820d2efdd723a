import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial

from riser.cylinder import (
    AdmissibleField,
    CylinderGrid,
    check_corollary1,
    check_corollary2,
    check_corollary3,
    cyl_integrate,
    cyl_quad,
    equality_case,
    gen_admissible,
    reduced_quad,
    verify_suite,
)

GRID = CylinderGrid(Nz=128)


def field_of(P, h=1.0):
    P = Polynomial(P) if not isinstance(P, Polynomial) else P
    return AdmissibleField(P, float(P(h)), float(P.deriv()(h)), h)


class TestGenAdmissible:
    def test_zero(self):
        f = gen_admissible(0, 0.0, 0.0, 1.0, coeffs=[0, 0, 0])
        assert np.allclose(f.P.coef, 0.0)

    def test_hermite(self):
        f = gen_admissible(0, 1.0, 0.0, 1.0, coeffs=[0, 0, 0])
        z = np.linspace(0, 1, 11)
        np.testing.assert_allclose(f.P(z), 3 * z**2 - 2 * z**3, atol=1e-14)
        assert f.P(1.0) == pytest.approx(1.0) and f.dP(1.0) == pytest.approx(0.0, abs=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), phi0=st.floats(0, 2), alpha0=st.floats(-3, 3), h=st.floats(0.6, 3))
    def test_endpoint_constraints(self, seed, phi0, alpha0, h):
        f = gen_admissible(seed, phi0, alpha0, h)
        scale = 1 + abs(phi0) + abs(alpha0)
        assert abs(f.P(0.0)) <= 1e-12 * scale
        assert abs(f.dP(0.0)) <= 1e-12 * scale
        assert f.P(h) == pytest.approx(phi0, abs=1e-12 * scale * h**6)
        assert f.dP(h) == pytest.approx(alpha0, abs=1e-12 * scale * h**6)

    def test_rejects_negative_phi(self):
        with pytest.raises(ValueError):
            gen_admissible(0, -0.1, 0.0, 1.0)


class TestQuadrature:
    def test_volume(self):
        assert cyl_integrate(lambda r, p, z: np.ones_like(z), GRID) == pytest.approx(math.pi, rel=1e-3)

    def test_linear_field(self):
        assert cyl_integrate(lambda r, p, z: z**2, GRID) == pytest.approx(math.pi / 3, rel=1e-3)

    @pytest.mark.parametrize("which", ["u2", "grad2", "lap2"])
    def test_full_and_reduced_agree(self, which):
        f = gen_admissible(7, 0.4, -1.2, 1.0)
        assert cyl_quad(f, GRID, which) == pytest.approx(reduced_quad(f, GRID, which), rel=1e-10)

    def test_grid_minimums(self):
        with pytest.raises(ValueError):
            CylinderGrid(Nr=8)
        with pytest.raises(ValueError):
            CylinderGrid(Nphi=4)


class TestCorollaries:
    def test_zero_field(self):
        f = field_of([0.0])
        for check in (check_corollary1, check_corollary2, check_corollary3):
            c = check(f, GRID)
            assert c.holds and c.lhs == 0.0

    def test_friedrichs_hermite_cubic(self):
        c = check_corollary1(field_of([0, 0, 3, -2]), GRID)
        assert c.lhs == pytest.approx(math.pi * 13 / 35, rel=1e-4)
        assert c.rhs == pytest.approx(4 * (math.pi * 6 / 5 + math.pi), rel=1e-4)
        assert c.holds

    def test_gradient_quadratic(self):
        c = check_corollary2(field_of([0, 0, 1]), GRID)
        assert c.lhs == pytest.approx(4 * math.pi / 3, rel=1e-4)
        assert c.rhs == pytest.approx(21 * math.pi, rel=1e-4)
        assert c.holds

    def test_laplacian_equality(self):
        c = check_corollary3(field_of([0, 0, 1]), GRID)
        assert c.lhs == pytest.approx(4 * math.pi)
        assert c.rhs == pytest.approx(4 * math.pi)
        assert 1 - 1e-6 <= c.ratio <= 1.0

    def test_slope_free(self):
        assert check_corollary3(gen_admissible(3, 0.5, 0.0, 1.0), GRID).lhs == 0.0

    def test_equality_case_report(self):
        eq = equality_case(GRID)
        assert 1 - 1e-6 <= eq["ratio"] <= 1.0


class TestSuite:
    def test_random_fields(self):
        res = verify_suite(1000, 42, GRID)
        assert res["fatal_violations"] == 0
        assert res["max_lhs_over_rhs"]["corollary1"] <= 1.0
        assert res["max_lhs_over_rhs"]["corollary3"] <= 1.0

    def test_negative_slopes_reported(self):
        res = verify_suite(200, 5, GRID, alpha_sign="negative")
        assert res["alpha_sign"] == "negative"
        assert all({"coeffs", "phi0", "alpha0"} <= set(v) for v in res["violations"])
        assert res["fatal_violations"] == 0

    def test_empty_suite(self):
        res = verify_suite(0, 1, GRID)
        assert res["fields_tested"] == 0 and res["violations"] == []
