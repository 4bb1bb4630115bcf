import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgnlab import Grid
from sgnlab.errors import BoundaryContaminationError, ContractViolationError, ModeError
from sgnlab.grid import check_far_field, cumulative_integral, derivative, integrate

from conftest import convergence_orders


class TestGridConstruction:
    def test_rejects_tiny_grids(self):
        with pytest.raises(ContractViolationError):
            Grid(n=4, dx=0.1)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ContractViolationError):
            Grid(n=64, dx=0.0)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ContractViolationError):
            Grid(n=64, dx=0.1, mode="moebius")

    def test_cell_centers(self):
        g = Grid(n=8, dx=0.5, x_left=-2.0, mode="line")
        x = g.cells()
        assert x[0] == -2.0 + 0.25
        assert np.allclose(np.diff(x), 0.5)
        assert g.length == 4.0


class TestDerivative:
    def test_constant_field_is_flat(self, periodic_grid, line_grid):
        for g in (periodic_grid, line_grid):
            d = derivative(np.full(g.n, 3.7), g)
            assert np.all(d == 0.0)

    @pytest.mark.parametrize("k", [1, 3, 7])
    def test_periodic_sine_fourth_order(self, k):
        errs = []
        for n in (128, 256):
            g = Grid.from_length(n, 2 * np.pi, 0.0, "periodic")
            x = g.cells()
            d = derivative(np.sin(k * x), g)
            errs.append(np.max(np.abs(d - k * np.cos(k * x))))
        orders = convergence_orders(errs)
        assert orders[0] >= 3.9

    def test_linear_exact_in_line_mode(self):
        g = Grid.from_length(64, 10.0, 0.0, "line")
        d = derivative(g.cells(), g)
        assert np.max(np.abs(d - 1.0)) < 1e-12

    def test_quartic_exact_everywhere_in_line_mode(self):
        # one-sided closures included: exact for polynomials up to degree 4
        g = Grid.from_length(64, 2.0, -1.0, "line")
        x = g.cells()
        d = derivative(x**4 - 2 * x**3 + x, g)
        assert np.max(np.abs(d - (4 * x**3 - 6 * x**2 + 1))) < 1e-11

    def test_linearity(self, periodic_grid, rng):
        g = periodic_grid
        f1 = rng.standard_normal(g.n)
        f2 = rng.standard_normal(g.n)
        a, b = 1.7, -0.3
        lhs = derivative(a * f1 + b * f2, g)
        rhs = a * derivative(f1, g) + b * derivative(f2, g)
        scale = np.max(np.abs(lhs)) + 1.0
        assert np.max(np.abs(lhs - rhs)) < 1e-14 * scale

    def test_length_mismatch_rejected(self, periodic_grid):
        with pytest.raises(ContractViolationError):
            derivative(np.ones(periodic_grid.n + 1), periodic_grid)

    def test_nonfinite_rejected(self, periodic_grid):
        f = np.ones(periodic_grid.n)
        f[3] = np.nan
        with pytest.raises(ContractViolationError):
            derivative(f, periodic_grid)


class TestIntegrate:
    def test_constant(self):
        g = Grid.from_length(100, 7.0, 0.0, "periodic")
        assert integrate(np.full(g.n, 2.5), g) == pytest.approx(2.5 * 7.0, abs=1e-12)

    def test_sine_over_full_periods(self):
        g = Grid.from_length(256, 2 * np.pi, 0.0, "periodic")
        val = integrate(np.sin(3 * g.cells()), g)
        assert abs(val) < 1e-12 * g.length

    def test_gaussian_closed_form(self):
        g = Grid.from_length(512, 40.0, -20.0, "line")
        x = g.cells()
        a, w = 1.3, 1.1
        val = integrate(a * np.exp(-(x**2) / w**2), g)
        exact = a * w * np.sqrt(np.pi)
        assert val == pytest.approx(exact, rel=1e-10)

    def test_integral_of_derivative_vanishes_periodic(self, periodic_grid, rng):
        from conftest import smooth_periodic_field

        f = smooth_periodic_field(periodic_grid, rng)
        val = integrate(derivative(f, periodic_grid), periodic_grid)
        assert abs(val) < 1e-12 * (np.max(np.abs(f)) + 1) * periodic_grid.length


class TestCumulativeIntegral:
    def test_zero_field(self, line_grid):
        F = cumulative_integral(np.zeros(line_grid.n), line_grid)
        assert np.all(F == 0.0)

    def test_constant_is_exact(self, line_grid):
        F = cumulative_integral(np.ones(line_grid.n), line_grid)
        assert np.max(np.abs(F - (line_grid.cells() - line_grid.x_left))) < 1e-12

    def test_gaussian_endpoint_matches_integrate(self, line_grid):
        x = line_grid.cells()
        f = np.exp(-(x**2))
        F = cumulative_integral(f, line_grid)
        assert abs(F[-1] - integrate(f, line_grid)) < 1e-12

    def test_refused_on_periodic(self, periodic_grid):
        with pytest.raises(ModeError):
            cumulative_integral(np.ones(periodic_grid.n), periodic_grid)

    def test_differentiation_recovers_integrand(self):
        # 2nd-order central difference of the primitive recovers f at order >= 1.9
        errs = []
        for n in (256, 512, 1024):
            g = Grid.from_length(n, 40.0, -20.0, "line")
            x = g.cells()
            f = np.exp(-(x**2) / 4.0) * np.cos(x)
            F = cumulative_integral(f, g)
            recovered = (F[2:] - F[:-2]) / (2 * g.dx)
            errs.append(np.max(np.abs(recovered - f[1:-1])))
        orders = convergence_orders(errs)
        assert min(orders) >= 1.9


class TestFarFieldGuard:
    def test_clean_state_passes(self, line_grid):
        h = np.ones(line_grid.n)
        u = np.zeros(line_grid.n)
        check_far_field(h, u, line_grid, 1.0)

    def test_contaminated_depth_aborts(self, line_grid):
        h = np.ones(line_grid.n)
        h[0] += 1e-4
        with pytest.raises(BoundaryContaminationError):
            check_far_field(h, np.zeros(line_grid.n), line_grid, 1.0)

    def test_contaminated_velocity_aborts(self, line_grid):
        u = np.zeros(line_grid.n)
        u[-2] = 1e-4
        with pytest.raises(BoundaryContaminationError):
            check_far_field(np.ones(line_grid.n), u, line_grid, 1.0)

    def test_interior_waves_allowed(self, line_grid):
        h = 1.0 + 0.5 * np.exp(-(line_grid.cells() ** 2))
        check_far_field(h, np.zeros(line_grid.n), line_grid, 1.0)

    def test_noop_on_periodic(self, periodic_grid):
        h = 2.0 * np.ones(periodic_grid.n)
        check_far_field(h, h, periodic_grid, 1.0)


@given(c=st.floats(-10, 10, allow_nan=False))
def test_derivative_of_constant_hypothesis(c):
    g = Grid.from_length(64, 5.0, 0.0, "line")
    assert np.all(derivative(np.full(g.n, c), g) == 0.0)
