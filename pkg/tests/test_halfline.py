import math

import numpy as np
import pytest

from rieszlab import halfline as hl
from rieszlab.quadrature import integrate_semi_infinite, QuadSpec

THETA0_AT_ONE = 0.24067399254693642  # agreed by the cumulative and compact-interval routes


class TestSymbols:
    @pytest.mark.parametrize("omega,t,expected", [(0.0, 4.0, 2.0), (3.0, 16.0, 2.0), (1.7, 0.0, 0.0)])
    def test_psi(self, omega, t, expected):
        assert hl.psi(omega, t) == pytest.approx(expected, abs=1e-15)

    def test_psi_concave_increasing(self):
        t = np.linspace(0, 50, 501)
        p = hl.psi(0.8, t)
        assert np.all(np.diff(p) > 0) and np.all(np.diff(p, 2) < 0)

    def test_psi_domain(self):
        with pytest.raises(ValueError):
            hl.psi(0.0, -1.0)

    def test_bernstein(self):
        c = math.sqrt(2.0)
        assert hl.bernstein_f(1.0, 3.0) == pytest.approx(math.sqrt(3.0 + 2.0) - c, rel=1e-15)

    def test_ltilde_value(self):
        assert hl.ltilde(0.0, 1.0) == pytest.approx(math.log(1 + math.sqrt(2)), rel=1e-15)
        assert hl.ltilde(0.0, 1.0) == pytest.approx(0.8813735870, abs=5e-11)

    def test_ltilde_forms_agree(self):
        lam = np.geomspace(1e-3, 1e3, 40)
        for omega in (0.0, 0.5, 4.0):
            assert np.allclose(hl.ltilde(omega, lam), hl.ltilde_log(omega, lam), rtol=1e-12)

    def test_ltilde_scaling(self):
        assert hl.ltilde(1.0, math.sqrt(2)) == pytest.approx(hl.ltilde(0.0, 1.0), rel=1e-15)

    def test_ltilde_bounds(self):
        lam = np.geomspace(1e-3, 1e3, 40)
        for omega in (0.0, 2.0):
            c2 = 1 + omega**2
            val = hl.ltilde(omega, lam)
            assert np.all(val <= lam / math.sqrt(c2) * (1 + 1e-15))
            assert np.all(val >= lam / np.sqrt(lam**2 + c2))

    def test_ltilde_small(self):
        assert hl.ltilde(0.0, 1e-12) == pytest.approx(1e-12, rel=1e-12)
        with pytest.raises(ValueError):
            hl.ltilde(0.0, 0.0)


class TestPhaseShift:
    def test_derivative_value(self):
        assert hl.phase_shift_derivative(0.0, 1.0) == pytest.approx(math.asinh(1.0) / (2 * math.pi), rel=1e-15)

    def test_derivative_limits(self):
        assert hl.phase_shift_derivative(0.0, 1e-9) == pytest.approx(1 / math.pi, rel=1e-12)
        assert hl.phase_shift_derivative(math.sqrt(3), 1e-9) == pytest.approx(1 / (2 * math.pi), rel=1e-12)

    def test_zero(self):
        for omega in (0.0, 1.0, 5.0):
            assert hl.phase_shift(omega, 0.0) == 0.0

    def test_large_lambda_limit(self):
        assert abs(hl.phase_shift(0.0, 1e4) - math.pi / 8) <= 2e-4
        assert hl.phase_shift_limit() == math.pi / 8

    def test_golden_value(self):
        assert hl.phase_shift(0.0, 1.0) == pytest.approx(THETA0_AT_ONE, rel=1e-14)

    def test_routes_agree(self):
        for omega in (0.0, 0.7, 3.0):
            for lam in (0.05, 1.0, 12.0, 300.0):
                assert hl.phase_shift(omega, lam) == pytest.approx(hl.phase_shift_compact(omega, lam), abs=1e-8)

    def test_against_integrated_derivative(self):
        # Independent route: integrate theta' on [0, 2] with the adaptive rule.
        from rieszlab.quadrature import integrate

        value, _ = integrate(lambda x: hl.phase_shift_derivative(0.0, np.maximum(x, 1e-300)), 0.0, 2.0)
        assert hl.phase_shift(0.0, 2.0) == pytest.approx(value, abs=1e-12)

    def test_monotone_bounded(self):
        lam = np.geomspace(1e-4, 1e5, 300)
        th = hl.phase_shift(0.5, lam)
        assert np.all(np.diff(th) > 0) and np.all(th > 0) and np.all(th < math.pi / 8)

    def test_scaling_identity(self, rng):
        omega = rng.uniform(0, 10, 100)
        lam = rng.uniform(0.01, 100, 100)
        lhs = np.array([hl.phase_shift(o, x) for o, x in zip(omega, lam)])
        rhs = np.array([hl.phase_shift(0.0, x / math.sqrt(1 + o * o)) for o, x in zip(omega, lam)])
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_derivative_bounds(self):
        for omega in np.linspace(0, 10, 50):
            c = math.sqrt(1 + omega**2)
            lam = np.geomspace(1e-3, 1e3, 50)
            d1 = hl.phase_shift_derivative(omega, lam)
            d2 = hl.phase_shift_second_derivative(omega, lam)
            assert np.all(d1 > 0)
            assert np.all(d1 <= c / (math.pi * (lam**2 + c * c)) * (1 + 1e-12))
            assert np.all(np.abs(d2) <= 3 * c / (math.pi * (lam**2 + c * c) ** 1.5) * (1 + 1e-12))

    def test_second_derivative_finite_difference(self):
        h = 1e-5
        for lam in (0.1, 1.0, 5.0):
            fd = (hl.phase_shift_derivative(1.0, lam + h) - hl.phase_shift_derivative(1.0, lam - h)) / (2 * h)
            assert hl.phase_shift_second_derivative(1.0, lam) == pytest.approx(fd, rel=1e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            hl.phase_shift(0.0, -1.0)
        with pytest.raises(ValueError):
            hl.phase_shift_derivative(0.0, 0.0)
        with pytest.raises(ValueError):
            hl.ModelParams(-1.0)


class TestVarphi:
    def test_at_zero(self):
        assert hl.varphi(0.3, 2.0, 0.0) == 1.0

    def test_routes_agree(self):
        t = np.array([1e-3, 0.1, 1.0, 10.0, 300.0])
        for omega, lam in [(0.0, 1.0), (1.0, 0.2), (3.0, 20.0)]:
            assert np.allclose(hl.varphi(omega, lam, t), np.exp(hl.log_varphi(omega, lam, t)), rtol=1e-11)

    def test_positive(self):
        assert np.all(hl.varphi(0.0, 1.0, np.linspace(0, 50, 11)) > 0)

    def test_derivative_at_zero(self):
        # Richardson-extrapolated one-sided difference of the adaptive route.
        h = 1e-4
        a = (hl.varphi(0.0, 1.0, h) - 1) / h
        b = (hl.varphi(0.0, 1.0, h / 2) - 1) / (h / 2)
        assert hl.varphi_prime_zero(0.0, 1.0) == pytest.approx(2 * b - a, rel=1e-5)

    def test_derivative_at_zero_values(self):
        assert hl.varphi_prime_zero(0.0, 1.0) == pytest.approx(2 * hl.phase_shift_derivative(0.0, 1.0), rel=1e-15)
        assert hl.varphi_prime_zero(0.0, 1e-9) == pytest.approx(1 / math.pi, rel=1e-9)
        assert hl.varphi_prime_zero(0.0, 1e3) < 1e-2


@pytest.fixture(scope="module")
def fit():
    return hl.fit_g(0.0, 1.0)


@pytest.fixture(scope="module")
def ef():
    return hl.make_eigenfunction(1.0, 2.0)


class TestGCorrection:
    def test_laplace_at_zero(self):
        for omega, lam in [(0.0, 1.0), (2.0, 0.5)]:
            c = math.sqrt(1 + omega**2)
            th = hl.phase_shift(omega, lam)
            a = math.sqrt(lam**2 + c * c)
            root = math.sqrt((a + c) / (2 * a)) / lam  # sqrt(f'/f) at lam^2
            assert hl.g_laplace(omega, lam, 0.0) == pytest.approx(math.cos(th) / lam - root, rel=1e-13)

    def test_laplace_bounds(self):
        assert 0 < hl.g_laplace(0.0, 1.0, 0.0) <= 1.0
        u = np.geomspace(1e-3, 1e6, 30)
        g = hl.g_laplace(0.0, 1.0, u)
        assert np.all(g > 0) and np.all(np.diff(g) < 0) and g[-1] < 1e-6

    def test_fit_quality(self, fit):
        assert fit.fit_residual <= 1e-5
        assert np.all(fit.weights > 0) and np.all(fit.rates > 0)

    def test_bound_by_sine_theta(self, fit):
        th = hl.phase_shift(0.0, 1.0)
        t = np.concatenate([[0.0], np.geomspace(1e-6, 100, 200)])
        g = fit(t)
        assert np.all(g >= 0) and np.all(g <= math.sin(th) * (1 + 1e-4))
        assert np.all(np.diff(g) <= 0)

    def test_moments(self, fit):
        assert fit.moment(0) == pytest.approx(hl.g_laplace(0.0, 1.0, 0.0), rel=1e-4)
        assert fit.moment(0) == pytest.approx(hl.g_zero_moment(0.0, 1.0), rel=1e-4)
        assert fit.moment(1) == pytest.approx(hl.g_first_moment(0.0, 1.0), rel=1e-3)

    def test_closed_integrals_against_quadrature(self, fit):
        spec = QuadSpec(abs_tol=1e-14, rel_tol=1e-10, decay="algebraic")
        sq, _ = integrate_semi_infinite(lambda t: fit(t) ** 2, 0.0, spec)
        assert fit.square_integral() == pytest.approx(sq, rel=1e-8)
        th = hl.phase_shift(0.0, 1.0)
        from rieszlab.quadrature import integrate

        head, _ = integrate(lambda t: np.sin(t + th) * fit(t), 0.0, 200.0, QuadSpec(abs_tol=1e-13, rel_tol=1e-10))
        assert fit.sine_product_integral(1.0, th) == pytest.approx(head, abs=1e-8)

    def test_validation(self):
        with pytest.raises(ValueError):
            hl.fit_g(0.0, 1.0, n_terms=3)
        with pytest.raises(ValueError):
            hl.fit_g(0.0, 0.0)

    def test_ceiling(self):
        with pytest.raises(hl.GFitError) as info:
            hl.fit_g(0.0, 1.0, n_terms=6, ceiling=1e-12)
        assert isinstance(info.value.best, hl.GCorrection)


class TestEigenfunction:
    def test_bounded(self, ef):
        t = np.linspace(1e-6, 40, 4001)
        assert np.all(np.abs(ef(t)) <= 2.0)

    def test_large_t(self, ef):
        t = np.linspace(30, 40, 50)
        assert np.max(np.abs(ef(t) - np.sin(ef.lam * t + ef.theta))) < 1e-6

    def test_vanishes_at_boundary(self, ef):
        # G(0+) = sin(theta), so F(0+) = sin(theta) - G(0+) = 0.
        assert ef.correction.at_zero == pytest.approx(math.sin(ef.theta), rel=1e-3)
        assert abs(hl.eigenfunction_F(ef, 1e-12)) < 1e-3 * math.sin(ef.theta)


class TestPiTransform:
    def test_linearity(self):
        lam = np.array([0.3, 1.0, 4.0])
        f1 = lambda t: t * np.exp(-t)  # noqa: E731
        f2 = lambda t: np.sin(t) * np.exp(-2 * t)  # noqa: E731
        a = hl.pi_transform(0.5, f1, lam, t_max=40.0)
        b = hl.pi_transform(0.5, f2, lam, t_max=40.0)
        c = hl.pi_transform(0.5, lambda t: 2 * f1(t) - 3 * f2(t), lam, t_max=40.0)
        assert np.allclose(c, 2 * a - 3 * b, rtol=1e-12, atol=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            hl.pi_transform(0.0, np.exp, [0.0, 1.0])
