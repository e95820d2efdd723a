import math

import numpy as np
import pytest

from riser.cylinder import hermite_lift
from riser.diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    TimeSeries,
    boundary_work_rate,
    compute_record,
    drag_rate,
    energy,
    energy_sandwich,
    fingerprint,
    h_functional,
    quad_1d,
    r_term,
    tension_energy_density,
)
from riser.model import (
    DriveValues,
    FieldState,
    Grid1D,
    Parameters,
    TensionProfile,
    TimeFunction,
    derive_constants,
    evaluate_drive,
)

UNIT = 1.0 / math.sqrt(math.pi)  # rho giving unit cross-section


class TestQuadrature:
    def test_constant(self):
        g = Grid1D(1.0, 7)
        assert quad_1d(np.ones(8), g) == 1.0

    def test_linear_exact(self):
        g = Grid1D(1.0, 7)
        assert quad_1d(g.z, g) == pytest.approx(0.5, abs=1e-15)

    def test_quadratic_error_bound(self):
        g = Grid1D(1.0, 100)
        assert quad_1d(g.z**2, g) == pytest.approx(1 / 3, abs=2e-5)


class TestEnergy:
    def test_zero_state(self):
        g = Grid1D(1.0, 16)
        st = FieldState(np.zeros(17), np.zeros(17))
        assert energy(st, Parameters(k=1.0), TensionProfile.constant(1.0, 1.0), g, 0.0) == 0.0

    def test_bending_only(self):
        # (1/2) int (12 z^2 - 12 z + 2)^2 dz = 2/5
        errs = []
        for N in (64, 128, 256):
            g = Grid1D(1.0, N)
            z = g.z
            st = FieldState(z**2 * (z - 1) ** 2, np.zeros_like(z))
            errs.append(abs(energy(st, Parameters(k=1.0, rho=UNIT), TensionProfile.constant(0.0, 1.0), g, 0.0) - 0.4))
        assert errs[-1] < 1e-4
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)

    def test_kinetic_only(self):
        g = Grid1D(1.0, 16)
        v = np.ones(17)
        v[0] = 0.0
        st = FieldState(np.zeros(17), v)
        E = energy(st, Parameters(k=1.0, rho=UNIT), TensionProfile.constant(1.0, 1.0), g, 0.0)
        assert E == pytest.approx(0.5 * quad_1d(v**2, g))

    def test_tension_energy_of_linear_profile(self):
        g = Grid1D(1.0, 10)
        a = TensionProfile.polynomial([1.0, 1.0], 1.0)
        # u = z: int (1 + z) dz = 3/2, exact for the midpoint rule on a linear profile
        assert tension_energy_density(g.z, a, g) == pytest.approx(1.5)


class TestDragRate:
    def test_at_rest(self):
        g = Grid1D(1.0, 8)
        st = FieldState(np.zeros(9), np.zeros(9))
        assert drag_rate(st, TimeFunction.constant(2.0), Parameters(k=1.0), g) == 0.0

    def test_uniform_velocity(self):
        g = Grid1D(1.0, 8)
        st = FieldState(np.zeros(9), np.ones(9))
        assert drag_rate(st, TimeFunction.constant(2.0), Parameters(k=1.0, rho=UNIT), g) == pytest.approx(2.0)

    def test_sin4_integral(self):
        g = Grid1D(1.0, 64)
        st = FieldState(np.zeros(65), np.sin(np.pi * g.z))
        params = Parameters(k=1.0, p=2.0, rho=2.0)
        got = drag_rate(st, TimeFunction.constant(1.5), params, g)
        assert got == pytest.approx(params.area * 1.5 * 3 / 8, rel=1e-12)


class TestBoundaryWork:
    def test_constant_phi(self):
        d = evaluate_drive(TimeFunction.constant(0.3), TimeFunction.constant(-1.0), 2.0)
        assert boundary_work_rate(d, 1.0, Parameters(k=1.0, g=(0, 0, 1))) == 0.0

    def test_arithmetic(self):
        d = DriveValues(phi=0.5, dphi=1.0, alpha=-1.0)
        assert boundary_work_rate(d, 1.0, Parameters(k=1.0, g=(0, 0, 1), rho=UNIT)) == pytest.approx(-1.5)

    def test_closed_form_on_dense_samples(self):
        phi, alpha = TimeFunction.power(1.0, -0.5), TimeFunction.power(-1.0, -0.25)
        params = Parameters(k=5.0, g=(0, 0, 1), rho=UNIT)
        for t in np.geomspace(1e-3, 1e4, 200):
            d = boundary_work_rate(evaluate_drive(phi, alpha, t), 1.0, params)
            s = 1.0 + t
            assert d == pytest.approx(0.5 * s**-1.75 - 0.125 * s**-3.0, rel=1e-12)

    def test_decaying_drive_is_dissipative(self):
        phi, alpha = TimeFunction.power(1.0, -0.5), TimeFunction.power(-1.0, -0.25)
        params = Parameters(k=5.0, g=(0, 0, 1), rho=UNIT)
        d = [boundary_work_rate(evaluate_drive(phi, alpha, t), 1.0, params) for t in np.linspace(0, 100, 1001)]
        assert max(d) < 0


class TestRTerm:
    def test_no_displacement(self):
        assert r_term(DriveValues(0.0, 1.0, 2.0), 1.0, Parameters(k=1.0, g=(0, 0, 1))) == 0.0

    def test_arithmetic(self):
        assert r_term(DriveValues(1.0, 0.0, 1.0), 2.0, Parameters(k=1.0, rho=UNIT)) == pytest.approx(2.0)

    def test_power_law_asymptotics(self):
        M1, M2, m, n = 0.5, 2.0, -0.3, 0.1
        phi, alpha = TimeFunction.power(M1, m), TimeFunction.power(M2, n)
        params = Parameters(k=5.0, g=(0, 0, 1), rho=0.7)
        devs = []
        for t in (1e3, 1e4):
            r = r_term(evaluate_drive(phi, alpha, t), 1.5, params)
            devs.append(abs(r / (params.area * 1.5 * M1 * M2 * t ** (m + n)) - 1))
        assert devs[1] < devs[0] < 1e-3


class TestHFunctional:
    def test_zero(self):
        g = Grid1D(1.0, 8)
        st = FieldState(np.zeros(9), np.zeros(9))
        assert h_functional(st, 0.0, 10.0, Parameters(k=1.0), g) == 0.0

    def test_arithmetic(self):
        g = Grid1D(1.0, 8)
        st = FieldState(np.ones(9), np.ones(9))
        assert h_functional(st, 2.0, 10.0, Parameters(k=1.0, rho=UNIT), g) == pytest.approx(21.0)


def random_admissible_state(rng, grid, constants, a_hat, modes=4):
    """Smooth state whose (phi, alpha) satisfy condK."""
    h = grid.h
    alpha = rng.uniform(-1.0, 1.0)
    # largest phi with (2|alpha| phi + phi^2) / alpha^2 <= rhs
    rhs = constants.condK_rhs
    phi_max = abs(alpha) * (math.sqrt(1.0 + rhs) - 1.0)
    phi = rng.uniform(0.0, phi_max)
    z = grid.z
    s = z / h
    bubble = s**2 * (1 - s) ** 2
    u = hermite_lift(phi, alpha, h)(z) + bubble * np.polynomial.polynomial.polyval(s, rng.normal(size=modes))
    v = s * np.polynomial.polynomial.polyval(s, rng.normal(size=modes))
    return FieldState(u, v), alpha


class TestRandomStates:
    N = 128

    def setup_method(self):
        self.grid = Grid1D(1.0, self.N)
        self.params = Parameters(k=5.0, rho=0.8)
        # negative tension makes both bounds non-trivial
        self.tension = TensionProfile.constant(-1.0, 1.0, self.N)
        self.constants = derive_constants(self.params, self.tension, delta=2.0)

    def test_energy_sandwich_holds(self, rng):
        for _ in range(1000):
            st, alpha = random_admissible_state(rng, self.grid, self.constants, 1.0)
            E = energy(st, self.params, self.tension, self.grid, alpha)
            lower, upper = energy_sandwich(st, E, self.constants, self.params, self.grid, alpha, rel_slack=1e-6)
            assert lower and upper

    def test_sandwich_zero_state(self):
        st = FieldState(np.zeros(self.N + 1), np.zeros(self.N + 1))
        assert energy_sandwich(st, 0.0, self.constants, self.params, self.grid, 0.0) == (True, True)

    def test_sandwich_kinetic_only_collapses(self):
        tension = TensionProfile.constant(0.0, 1.0)
        c = derive_constants(self.params, TensionProfile.constant(1.0, 1.0), delta=2.0)
        v = np.sin(np.pi * self.grid.z)
        st = FieldState(np.zeros(self.N + 1), v)
        E = energy(st, self.params, tension, self.grid, 0.0)
        assert energy_sandwich(st, E, c, self.params, self.grid, 0.0) == (True, True)

    def test_h_bound(self, rng):
        c = self.constants
        for _ in range(1000):
            st, alpha = random_admissible_state(rng, self.grid, c, 1.0)
            E = energy(st, self.params, self.tension, self.grid, alpha)
            H = h_functional(st, E, c.sigma, self.params, self.grid)
            assert H >= c.mu * E * (1 - 1e-9)


class TestRecords:
    def test_columns_in_declared_order(self):
        rec = DiagnosticsRecord(*range(11))
        assert rec.row() == tuple(float(i) for i in range(11))
        assert CSV_COLUMNS[:3] == ("t", "E", "I_b")

    def test_series_requires_increasing_time(self):
        s = TimeSeries()
        s.append(DiagnosticsRecord(*([0.0] * 11)))
        with pytest.raises(ValueError):
            s.append(DiagnosticsRecord(*([0.0] * 11)))

    def test_compute_record(self):
        g = Grid1D(1.0, 32)
        z = g.z
        params = Parameters(k=5.0, g=(0, 0, 1))
        a = TensionProfile.constant(1.0, 1.0)
        st = FieldState(z**2 * (z - 1) ** 2 + hermite_lift(0.1, -0.2, 1.0)(z), 0.5 * z**2, 0.0)
        drive = DriveValues(0.1, 0.5, -0.2)
        rec = compute_record(st, drive, params, a, TimeFunction.constant(1.0), g, 16.0)
        assert rec.E == energy(st, params, a, g, -0.2)
        assert rec.q == pytest.approx(params.area * (2 * 0.1 * -0.2 + 0.01))
        assert rec.max_abs_u == np.max(np.abs(st.u))
        assert rec.d_t == boundary_work_rate(drive, 1.0, params)

    def test_fingerprint_is_key_order_independent(self):
        assert fingerprint({"a": 1, "b": [1, 2]}) == fingerprint({"b": [1, 2], "a": 1})
        assert fingerprint({"a": 1}) != fingerprint({"a": 2})
