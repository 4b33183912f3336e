"""Desk-scale numerical checks of the model's analytic properties.

Covers the coefficient prior's marginal density (pole at zero iff the
sparsity parameter is at most 1/2), the two-sided normalizing-constant
bounds for the beta prime, stochastic dominance in its second parameter,
the 4a/k^2 tail-mass bound, and the thresholded dimensionality count.

All integrals run over log-transformed scale variables so the sharp peak the
mixing density develops near omega^2 = x^2 for small |x| is resolved;
quadrature targets 1e-10 relative.
"""

import math

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError

_EPSREL = 1e-10


def _check_ab(a, b):
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"a must be finite and > 0, got {a}")
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"b must be finite and > 0, got {b}")


def _log_beta_prime_const(a, b):
    return math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)


def _quad_pieces(f, points):
    """Sum scipy.quad over consecutive panels; raise on non-convergence."""
    total = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=_EPSREL, limit=400)
        if not math.isfinite(val):
            raise NumericError(f"quadrature failed on ({lo}, {hi})")
        total += val
    return total


def marginal_density(beta, a, b, sigma2=1.0):
    """Density of one coefficient given the noise variance.

    pi(beta | sigma2) = g(beta/sigma)/sigma with

        g(x) = C / sqrt(2 pi) * int_0^inf exp(-x^2/(2 w)) w^(a-3/2) (1+w)^(-a-b) dw,

    C the beta prime normalizer; integrated over t = log w with panel splits
    at the peak locations t = 2 log|x| and t = 0.
    """
    _check_ab(a, b)
    if not (sigma2 > 0 and math.isfinite(sigma2)):
        raise DomainError(f"sigma2 must be finite and > 0, got {sigma2}")
    x = float(beta) / math.sqrt(sigma2)
    if x == 0.0 and a <= 0.5:
        raise DomainError("the marginal density has a pole at zero when a <= 1/2")
    logc = _log_beta_prime_const(a, b) - 0.5 * math.log(2.0 * math.pi)

    if x == 0.0:
        # finite only for a > 1/2; reduces to a beta function in w
        return (
            math.exp(logc + math.lgamma(a - 0.5) + math.lgamma(b + 0.5) - math.lgamma(a + b))
            / math.sqrt(sigma2)
        )

    x2 = x * x

    def integrand(t):
        if t < -700.0:
            return 0.0
        softplus = t + math.log1p(math.exp(-t)) if t > 30.0 else math.log1p(math.exp(t))
        e = -0.5 * x2 * math.exp(-t) + (a - 0.5) * t - (a + b) * softplus + logc
        return math.exp(e) if e > -745.0 else 0.0

    peak = 2.0 * math.log(abs(x))
    points = sorted({min(peak, 0.0) - 80.0, peak, 0.0, max(peak, 0.0) + 80.0 + 750.0 / (b + 0.5)})
    return _quad_pieces(integrand, points) / math.sqrt(sigma2)


def lemma1_ratio(a, b):
    """Gamma(a+b)/(Gamma(a)Gamma(b)) with its two-sided a b/(a+b) bounds."""
    _check_ab(a, b)
    ratio = math.exp(_log_beta_prime_const(a, b))
    lower = a * b / (a + b)
    upper = a * b * 2.0 ** (a + b) / (a + b)
    if not lower <= ratio <= upper:
        raise NumericError(f"normalizer bounds violated at (a={a}, b={b})")
    return ratio, lower, upper


def tail_mass_bound(k, a, b):
    """(2 * upper tail mass of the marginal beyond k, the 4a/k^2 bound).

    The bound chain uses the Gaussian tail inequality, dominance of the
    scale prior by its b = 1 member, and a change of variables; it is
    non-asymptotic for b > 1.
    """
    _check_ab(a, b)
    if not b > 1:
        raise DomainError(f"the dominance step needs b > 1, got {b}")
    if not (k > 0 and math.isfinite(k)):
        raise DomainError(f"k must be finite and > 0, got {k}")
    logc = _log_beta_prime_const(a, b)
    k2 = k * k

    # 2 int_k^inf g = E_w[P(|N(0, w)| >= k)] = E_w[erfc(k / sqrt(2 w))]
    def integrand(t):
        if t < -700.0:
            return 0.0
        softplus = t + math.log1p(math.exp(-t)) if t > 30.0 else math.log1p(math.exp(t))
        e = a * t - (a + b) * softplus + logc
        if e <= -745.0:
            return 0.0
        return math.exp(e) * special.erfc(k * math.exp(-0.5 * t) / math.sqrt(2.0))

    peak = 2.0 * math.log(k)
    points = sorted({min(peak, 0.0) - 80.0, peak, 0.0, max(peak, 0.0) + 80.0 + 750.0 / b})
    tail = _quad_pieces(integrand, points)
    bound = 4.0 * a / k2
    if tail > bound * (1.0 + 1e-8):
        raise NumericError(f"tail bound violated: tail={tail} > bound={bound}")
    return tail, bound


def beta_prime_cdf(x, a, b):
    """P(W <= x) for the beta prime law, by quadrature on the log scale."""
    _check_ab(a, b)
    if x <= 0:
        return 0.0
    logc = _log_beta_prime_const(a, b)

    def integrand(t):
        softplus = t + math.log1p(math.exp(-t)) if t > 30.0 else math.log1p(math.exp(t))
        e = a * t - (a + b) * softplus + logc
        return math.exp(e) if e > -745.0 else 0.0

    lo = min(math.log(x), 0.0) - 750.0 / a
    points = sorted({lo, min(math.log(x), 0.0), math.log(x)})
    return min(_quad_pieces(integrand, points), 1.0)


def stochastic_dominance_check(a, b, grid):
    """True when the b > 1 member is dominated by the b = 1 member at every
    grid point, i.e. CDF_{a,b}(x) >= CDF_{a,1}(x)."""
    _check_ab(a, b)
    if not b > 1:
        raise DomainError(f"dominance comparison needs b > 1, got {b}")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or np.any(grid <= 0):
        raise DomainError("grid must be one-dimensional and strictly positive")
    for x in grid:
        if beta_prime_cdf(float(x), a, b) < beta_prime_cdf(float(x), a, 1.0) - 1e-9:
            return False
    return True


def generalized_dimension(beta, sigma, delta):
    """Number of coordinates with |beta_i / sigma| above the threshold."""
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be finite and > 0, got {sigma}")
    if not (delta > 0 and math.isfinite(delta)):
        raise DomainError(f"delta must be finite and > 0, got {delta}")
    beta = np.asarray(beta, dtype=np.float64)
    return int(np.sum(np.abs(beta / sigma) > delta))


def marginal_density_grid(a, b, sigma2=1.0, lo=-5.0, hi=5.0, n_points=201):
    """(beta, density) pairs for plotting; skips an exact zero when a <= 1/2."""
    xs = np.linspace(lo, hi, n_points)
    rows = []
    for x in xs:
        if x == 0.0 and a <= 0.5:
            continue
        rows.append((float(x), marginal_density(float(x), a, b, sigma2)))
    return rows
