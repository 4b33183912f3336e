import math

import numpy as np
import pytest
from scipy import integrate

from nbp.errors import DomainError
from nbp.specfun import digamma, dlog_bessel_k_dorder, inverse_digamma, log_bessel_k

EULER = 0.5772156649015328606


def logk_quad(nu, x):
    """Independent oracle: adaptive quadrature of the cosh integral,
    exponentially scaled so large x stays above quad's absolute floor."""
    val, _ = integrate.quad(
        lambda t: math.exp(-x * (math.cosh(t) - 1.0)) * math.cosh(nu * t), 0, 60, limit=400
    )
    return math.log(val) - x


class TestDigamma:
    def test_analytic_points(self):
        assert digamma(1.0) == pytest.approx(-EULER, abs=1e-12)
        assert digamma(2.0) == pytest.approx(1.0 - EULER, abs=1e-12)
        assert digamma(0.5) == pytest.approx(-EULER - 2.0 * math.log(2.0), abs=1e-12)

    def test_recurrence_property(self):
        rng = np.random.default_rng(0)
        xs = rng.uniform(1e-3, 100.0, 1000)
        for x in xs:
            resid = digamma(x + 1.0) - digamma(x) - 1.0 / x
            assert abs(resid) <= 1e-12 * max(1.0, 1.0 / x)

    def test_accuracy_across_range(self):
        # abs <= 1e-12 where representable; ulp-limited below x ~ 0.1
        rng = np.random.default_rng(1)
        for x in 10.0 ** rng.uniform(-6, 6, 200):
            got = digamma(x)
            ref = _mp_digamma(x)
            tol = max(1e-12, 4.0 * abs(ref) * 2.3e-16)
            assert abs(got - ref) <= tol, (x, got, ref)

    def test_domain_errors(self):
        for bad in (0.0, -1.0, math.nan, math.inf):
            with pytest.raises(DomainError):
                digamma(bad)


def _mp_digamma(x):
    import mpmath as mp

    mp.mp.dps = 30
    return float(mp.digamma(x))


class TestInverseDigamma:
    def test_analytic_inverses(self):
        assert inverse_digamma(-EULER) == pytest.approx(1.0, rel=1e-10)
        assert inverse_digamma(1.0 - EULER) == pytest.approx(2.0, rel=1e-10)

    def test_round_trip_through_mml_estimate(self):
        # 0.184 is a representative sparse-fit hyperparameter value
        assert inverse_digamma(digamma(0.184)) == pytest.approx(0.184, rel=1e-9)

    def test_round_trip_property(self):
        for y in np.linspace(-30.0, 30.0, 121):
            x = inverse_digamma(y)
            assert x > 0
            assert abs(digamma(x) - y) <= 1e-10

    def test_domain_error(self):
        with pytest.raises(DomainError):
            inverse_digamma(math.nan)


class TestLogBesselK:
    def test_half_integer_closed_form(self):
        # K_{1/2}(x) = sqrt(pi/(2x)) e^-x
        expected = 0.5 * math.log(math.pi / 4.0) - 2.0
        assert log_bessel_k(0.5, 2.0) == pytest.approx(expected, abs=1e-12)

    def test_order_symmetry_exact(self):
        assert log_bessel_k(-0.3, 1.7) == log_bessel_k(0.3, 1.7)

    def test_quadrature_oracle_at_1_1(self):
        # frozen from the cosh-integral oracle (quad err ~1e-9)
        assert log_bessel_k(1.0, 1.0) == pytest.approx(-0.5076519482107521, abs=5e-9)

    def test_quadrature_oracle_random(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            nu = rng.uniform(-5.0, 5.0)
            x = 10.0 ** rng.uniform(-2, 2)
            assert log_bessel_k(nu, x) == pytest.approx(logk_quad(nu, x), abs=1e-8)

    def test_recurrence_in_log_space(self):
        # K_{v+1} = K_{v-1} + (2v/x) K_v, all positive terms
        rng = np.random.default_rng(3)
        for _ in range(200):
            nu = rng.uniform(0.0, 8.0)
            x = 10.0 ** rng.uniform(-6, 2.5)
            l_lo = log_bessel_k(nu - 1.0, x)
            l_mid = log_bessel_k(nu, x)
            l_hi = log_bessel_k(nu + 1.0, x)
            rhs = np.logaddexp(l_lo, math.log(2.0 * abs(nu) / x) + l_mid) if nu > 0 else l_lo
            assert l_hi == pytest.approx(rhs, abs=1e-8)

    def test_finite_over_stated_domain(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            nu = rng.uniform(-30.0, 30.0)
            x = 10.0 ** rng.uniform(-10, math.log10(700.0))
            assert math.isfinite(log_bessel_k(nu, x))

    def test_domain_error(self):
        with pytest.raises(DomainError):
            log_bessel_k(1.0, 0.0)
        with pytest.raises(DomainError):
            log_bessel_k(1.0, -2.0)


class TestDlogBesselKDOrder:
    def test_zero_at_symmetric_order(self):
        assert dlog_bessel_k_dorder(0.0, 3.0) == 0.0

    def test_odd_in_order(self):
        for nu, x in [(0.7, 2.3), (1.9, 0.4)]:
            assert dlog_bessel_k_dorder(-nu, x) == pytest.approx(
                -dlog_bessel_k_dorder(nu, x), rel=1e-12
            )

    def test_richardson_oracle(self):
        # frozen 4-point Richardson extrapolation of the quadrature oracle
        assert dlog_bessel_k_dorder(0.5, 2.0) == pytest.approx(0.20634564990062998, rel=1e-6)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            dlog_bessel_k_dorder(0.5, -1.0)
