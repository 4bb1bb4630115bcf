import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgnlab import FlowState, Grid, Params
from sgnlab.elliptic import solve_helmholtz
from sgnlab.errors import ContractViolationError, ModeError
from sgnlab.grid import derivative
from sgnlab.kinematics import pq_fields
from sgnlab.regularization import (
    chi,
    compute_A,
    compute_B,
    compute_MN,
    compute_reg_fields,
    compute_V1,
    compute_V2,
    cutoff_active,
)

from conftest import convergence_orders


class TestChi:
    def test_above_threshold(self):
        assert chi(-1.0, 0.5) == 0.0

    def test_below_threshold(self):
        assert chi(-3.0, 0.5) == 1.0

    def test_continuous_at_threshold(self):
        assert chi(-2.0, 0.5) == 0.0

    def test_array_input(self):
        z = np.array([-3.0, -2.0, -1.0, 0.0, 5.0])
        out = chi(z, 0.5)
        assert np.allclose(out, [1.0, 0.0, 0.0, 0.0, 0.0])

    def test_requires_positive_epsilon(self):
        with pytest.raises(ContractViolationError):
            chi(-1.0, 0.0)

    @given(z=st.floats(-1e6, 1e6, allow_nan=False),
           eps=st.floats(1e-3, 10.0, allow_nan=False))
    def test_bounded_by_square_hypothesis(self, z, eps):
        v = chi(z, eps)
        assert 0.0 <= v <= z * z * (1 + 1e-12) + 1e-300
        if z >= -1.0 / eps:
            assert v == 0.0

    def test_sign_property_bulk(self, rng):
        # z * chi(z) <= 0: the energy production term is never positive
        z = rng.uniform(-100, 100, size=10_000)
        for eps in (0.05, 0.2, 1.0):
            assert np.all(z * chi(z, eps) <= 0.0)
            v = chi(z, eps)
            assert np.all(v >= 0.0) and np.all(v <= z * z)

    def test_c1_at_activation(self):
        # finite-difference slope tends to zero approaching the threshold
        eps = 0.5
        zs = -2.0 - np.logspace(-8, -2, 7)
        slopes = (chi(zs + 1e-10, eps) - chi(zs, eps)) / 1e-10
        assert np.max(np.abs(slopes)) < 0.05


def make_line_setup(n=512, gamma=9.81, eps=0.25):
    g = Grid.from_length(n, 40.0, -20.0, "line")
    p = Params(g=9.81, gamma=gamma, hbar=1.0, epsilon=eps)
    return g, p


class TestComputeA:
    def test_inactive_cutoff_gives_zero(self):
        g, p = make_line_setup()
        x = g.cells()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        P = np.full(g.n, -1.0)
        Q = np.full(g.n, -0.5)
        A, A_x = compute_A(s, P, Q, p, g)
        assert np.all(A == 0.0) and np.all(A_x == 0.0)

    def test_odd_bracket_gives_odd_field(self):
        g, p = make_line_setup()
        x = g.cells()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        # chi(P) - chi(Q) odd about the domain center: P active on the left
        # half, Q mirror-active on the right half
        bump = 2.0 * np.exp(-((np.abs(x) - 5.0) ** 2))
        P = np.where(x < 0, -1.0 / p.epsilon - bump, 0.0)
        Q = np.where(x > 0, -1.0 / p.epsilon - bump[::-1], 0.0)
        A, _ = compute_A(s, P, Q, p, g)
        assert np.max(np.abs(A + A[::-1])) <= 1e-10 * np.max(np.abs(A))

    def test_matches_helmholtz_bitwise(self):
        g, p = make_line_setup(eps=0.5)
        x = g.cells()
        h = np.ones(g.n)
        s = FlowState(h, np.zeros(g.n))
        spike = 1.5 * np.exp(-(x**2))
        P = -1.0 / p.epsilon - spike
        Q = np.zeros(g.n)
        r = (p.sqrt_3gamma / 48.0) * (chi(P, p.epsilon) - chi(Q, p.epsilon)) / np.sqrt(h)
        A, _ = compute_A(s, P, Q, p, g)
        assert np.array_equal(A, solve_helmholtz(r, p, g))


class TestComputeV2:
    def test_zero_A(self):
        g, p = make_line_setup()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        assert np.all(compute_V2(s, np.zeros(g.n), p) == 0.0)

    def test_unit_depth_scaling(self):
        g, p = make_line_setup()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        A = np.sin(g.cells())
        v2 = compute_V2(s, A, p)
        assert np.allclose(v2, (3.0 * p.g / p.sqrt_3gamma) * A, rtol=1e-14)

    def test_two_normalizations_agree(self):
        # the display carries two expressions whose constants must agree:
        # (g/16) h^{-1/2} (g - gamma dxx)^{-1} { h^{-1/2} (chiP - chiQ) }
        # equals (3g/sqrt(3 gamma)) h^{-1/2} A since 3/48 = 1/16
        g, p = make_line_setup(eps=0.5)
        x = g.cells()
        h = 1.0 + 0.1 * np.exp(-(x**2))
        s = FlowState(h, np.zeros(g.n))
        P = -1.0 / p.epsilon - 1.5 * np.exp(-(x**2))
        Q = np.full(g.n, 0.0)
        chiP, chiQ = chi(P, p.epsilon), chi(Q, p.epsilon)
        A, _ = compute_A(s, P, Q, p, g)
        direct = (p.g / 16.0) / np.sqrt(h) * solve_helmholtz((chiP - chiQ) / np.sqrt(h), p, g)
        via_A = compute_V2(s, A, p)
        scale = np.max(np.abs(via_A)) + 1e-300
        assert np.max(np.abs(direct - via_A)) < 1e-9 * scale


class TestComputeV1:
    def test_zero_when_inactive(self):
        g, p = make_line_setup()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        z = np.zeros(g.n)
        v1 = compute_V1(s, z, z, z, z, p, g)
        assert np.all(v1 == 0.0)

    def test_mode_error_on_periodic(self):
        g = Grid.from_length(128, 10.0, 0.0, "periodic")
        p = Params(epsilon=0.1)
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        z = np.zeros(g.n)
        with pytest.raises(ModeError):
            compute_V1(s, z, z, z, z, p, g)

    def test_decays_toward_boundaries(self):
        g, p = make_line_setup(n=1024)
        x = g.cells()
        h = 1.0 + 0.05 * np.exp(-(x**2))
        u = 0.1 * np.exp(-(x**2))
        s = FlowState(h, u)
        A = 0.3 * np.exp(-(x**2) / 4.0)
        A_x = derivative(A, g)
        chiP = 4.0 * np.exp(-(x**2))
        chiQ = np.zeros(g.n)
        v1 = compute_V1(s, A, A_x, chiP, chiQ, p, g)
        edge = max(np.max(np.abs(v1[:4])), np.max(np.abs(v1[-4:])))
        assert edge <= 1e-6 * np.max(np.abs(v1))

    def test_self_convergence(self):
        diffs = []
        prev = None
        for n in (512, 1024, 2048):
            g = Grid.from_length(n, 40.0, -20.0, "line")
            p = Params(g=9.81, gamma=9.81, hbar=1.0, epsilon=0.25)
            x = g.cells()
            h = 1.0 + 0.05 * np.exp(-(x**2))
            u = 0.1 * np.sin(x) * np.exp(-(x**2) / 4)
            s = FlowState(h, u)
            A = 0.3 * np.exp(-(x**2) / 4.0)
            v1 = compute_V1(s, A, derivative(A, g), 4.0 * np.exp(-(x**2)),
                            np.zeros(g.n), p, g)
            if prev is not None:
                diffs.append(np.max(np.abs(0.5 * (v1[::2] + v1[1::2]) - prev)))
            prev = v1
        assert convergence_orders(diffs)[0] >= 1.5


class TestComputeB:
    def test_zero_when_inactive(self):
        g, p = make_line_setup()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        z = np.zeros(g.n)
        b = compute_B(s, z, z, z, p, g)
        assert np.all(b == 0.0)

    def test_finite_on_active_state(self):
        g, p = make_line_setup(n=1024)
        x = g.cells()
        h = 1.0 + 0.05 * np.exp(-(x**2))
        u = 0.1 * np.exp(-(x**2))
        s = FlowState(h, u)
        A_x = derivative(0.3 * np.exp(-(x**2) / 4.0), g)
        b = compute_B(s, A_x, 4.0 * np.exp(-(x**2)), np.zeros(g.n), p, g)
        assert np.all(np.isfinite(b)) and np.max(np.abs(b)) > 0

    def test_self_convergence(self):
        diffs = []
        prev = None
        for n in (512, 1024, 2048):
            g = Grid.from_length(n, 40.0, -20.0, "line")
            p = Params(g=9.81, gamma=9.81, hbar=1.0, epsilon=0.25)
            x = g.cells()
            h = 1.0 + 0.05 * np.exp(-(x**2))
            u = 0.1 * np.sin(x) * np.exp(-(x**2) / 4)
            s = FlowState(h, u)
            A_x = derivative(0.3 * np.exp(-(x**2) / 4.0), g)
            b = compute_B(s, A_x, 4.0 * np.exp(-(x**2)), np.zeros(g.n), p, g)
            if prev is not None:
                diffs.append(np.max(np.abs(0.5 * (b[::2] + b[1::2]) - prev)))
            prev = b
        assert convergence_orders(diffs)[0] >= 1.5


class TestComputeMN:
    def test_no_cutoff_reduces_to_script_r_term(self):
        from sgnlab.regularization import RegFields

        g, p = make_line_setup()
        x = g.cells()
        h = 1.0 + 0.1 * np.exp(-(x**2))
        s = FlowState(h, np.zeros(g.n))
        z = np.zeros(g.n)
        reg = RegFields(A=z, A_x=z, B=z, V1=z, V2=z, chiP=z, chiQ=z)
        scriptR = np.sin(x)
        M, N = compute_MN(s, reg, scriptR, p)
        expected = -3.0 * scriptR / h**2
        assert np.allclose(M, expected, rtol=1e-14)
        assert np.allclose(N, expected, rtol=1e-14)

    def test_n_minus_m_is_twice_v2(self):
        from sgnlab.regularization import RegFields

        g, p = make_line_setup()
        x = g.cells()
        h = 1.0 + 0.1 * np.exp(-(x**2))
        s = FlowState(h, np.zeros(g.n))
        z = np.zeros(g.n)
        v2 = np.cos(x)
        reg = RegFields(A=z, A_x=z, B=z, V1=np.sin(2 * x), V2=v2, chiP=z, chiQ=z)
        M, N = compute_MN(s, reg, np.sin(x), p)
        assert np.max(np.abs((N - M) - 2.0 * v2)) < 1e-14 * (1 + np.max(np.abs(v2)))

    def test_flat_state_zero(self):
        from sgnlab.regularization import RegFields

        g, p = make_line_setup()
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        z = np.zeros(g.n)
        reg = RegFields(A=z, A_x=z, B=z, V1=z, V2=z, chiP=z, chiQ=z)
        M, N = compute_MN(s, reg, np.zeros(g.n), p)
        assert np.all(M == 0.0) and np.all(N == 0.0)


class TestOrchestration:
    def test_inactive_returns_none(self):
        g, p = make_line_setup(eps=0.1)
        x = g.cells()
        h = 1.0 + 0.01 * np.exp(-(x**2))
        s = FlowState(h, np.zeros(g.n))
        P, Q = pq_fields(s, p, g)
        assert not cutoff_active(P, Q, p.epsilon)
        assert compute_reg_fields(s, P, Q, p, g) is None

    def test_epsilon_zero_never_active(self, rng):
        P = rng.uniform(-1e6, 0, 64)
        assert not cutoff_active(P, P, 0.0)

    def test_active_fields_all_finite(self):
        g, p = make_line_setup(n=1024, eps=0.2)
        x = g.cells()
        h = 1.0 + 0.2 * np.exp(-(x**2))
        u = 2.0 * np.tanh(x) * np.exp(-(x**2) / 9)
        s = FlowState(h, u)
        P, Q = pq_fields(s, p, g)
        P = P - 10.0 * np.exp(-(x**2))  # force activation
        fields = compute_reg_fields(s, P, Q, p, g)
        assert fields is not None
        for name in ("A", "A_x", "B", "V1", "V2", "chiP", "chiQ"):
            assert np.all(np.isfinite(getattr(fields, name)))
        assert np.all(fields.chiP >= 0) and np.all(fields.chiQ >= 0)
        assert np.all(fields.chiP <= P**2) and np.all(fields.chiQ <= Q**2)

    def test_periodic_activation_rejected(self):
        g = Grid.from_length(128, 10.0, 0.0, "periodic")
        p = Params(epsilon=0.5)
        s = FlowState(np.ones(g.n), np.zeros(g.n))
        P = np.full(g.n, -3.0)
        with pytest.raises(ModeError):
            compute_reg_fields(s, P, P, p, g)
