"""Scalar special functions: digamma, its inverse, and log K_nu.

Everything here is written as numba-compatible scalar kernels (see
``nbp._jit``) so the samplers and the variational updates can call them from
inside compiled loops.  Public wrappers validate domains and raise package
errors; kernels assume valid input.

Implementation notes:

* digamma/trigamma: upward recurrence to shift the argument to >= 6, then the
  Bernoulli asymptotic series.
* log K_nu(x): the order is reduced to mu in [-1/2, 1/2) plus an integer; the
  (K_mu, K_{mu+1}) pair comes from Temme's series for x <= 2 and from the
  Steed/Thompson-Barnett continued fraction for x > 2, after which the
  three-term recurrence runs upward entirely in log space (all terms
  positive, so log-add-exp is stable).  A dedicated branch handles extremely
  small arguments (x < 1e-100) where the leading small-argument behavior is
  exact to double precision; those arise when a shrunk coefficient drives the
  GIG chi parameter to its floor.
"""

import math

from ._jit import kernel
from .errors import DomainError, NumericError

EULER = 0.5772156649015328606
LN2 = 0.6931471805599453094
# cubic coefficient of the 1/Gamma(1+z) Maclaurin series
_RECGAMMA_A3 = -0.04200263503409523553


@kernel
def _digamma(x):
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    s = math.log(x) - 0.5 * inv
    s -= inv2 * (
        1.0 / 12.0
        - inv2
        * (
            1.0 / 120.0
            - inv2
            * (
                1.0 / 252.0
                - inv2
                * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0)))
            )
        )
    )
    return acc + s


@kernel
def _trigamma(x):
    acc = 0.0
    while x < 6.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    s = inv + 0.5 * inv2
    s += inv * inv2 * (
        1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0)))
    )
    return acc + s


@kernel
def _inverse_digamma(y):
    """Newton solve of digamma(x) = y; returns -1.0 on non-convergence."""
    if y >= -2.22:
        x = math.exp(y) + 0.5
    else:
        x = -1.0 / (y + EULER)
    tol = 1e-13 if abs(y) < 100.0 else abs(y) * 8e-16
    for _ in range(100):
        f = _digamma(x) - y
        if abs(f) <= tol:
            return x
        xn = x - f / _trigamma(x)
        if xn <= 0.0:
            xn = 0.5 * x
        x = xn
    if abs(_digamma(x) - y) <= 1e-10:
        return x
    return -1.0


@kernel
def _logaddexp(a, b):
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@kernel
def _temme_k_pair(mu, x):
    """(K_mu, K_{mu+1}) for |mu| <= 1/2 and 0 < x <= 2, Temme's series."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    if abs(pimu) < 1e-8:
        fact = 1.0 + pimu * pimu / 6.0
    else:
        fact = pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    if abs(e) < 1e-8:
        fact2 = 1.0 + e * e / 6.0
    else:
        fact2 = math.sinh(e) / e
    gampl = math.exp(-math.lgamma(1.0 + mu))
    gammi = math.exp(-math.lgamma(1.0 - mu))
    if abs(mu) < 1e-4:
        gam1 = -EULER - _RECGAMMA_A3 * mu * mu
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    gam2 = 0.5 * (gammi + gampl)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    ksum = ff
    ee = math.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = 1.0
    d2 = x2 * x2
    ksum1 = p
    mu2 = mu * mu
    for i in range(1, 1000):
        fi = float(i)
        ff = (fi * ff + p + q) / (fi * fi - mu2)
        c *= d2 / fi
        p /= fi - mu
        q /= fi + mu
        dlt = c * ff
        ksum += dlt
        ksum1 += c * (p - fi * ff)
        if abs(dlt) < abs(ksum) * 1e-17:
            break
    return ksum, ksum1 * (2.0 / x)


@kernel
def _cf2_logk_pair(mu, x):
    """(log K_mu, log K_{mu+1}) for |mu| <= 1/2 and x > 2, Steed's CF2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu * mu
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 1000):
        a -= 2.0 * (i - 1.0)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-16:
            break
    h = a1 * h
    lk0 = 0.5 * math.log(math.pi / (2.0 * x)) - x - math.log(s)
    lk1 = lk0 + math.log((mu + x + 0.5 - h) / x)
    return lk0, lk1


@kernel
def _tiny_arg_logk_pair(mu, x):
    """(log K_mu, log K_{mu+1}) for |mu| <= 1/2 and x < 1e-100.

    Leading small-argument behavior; the dropped corrections are O(x^2)
    relative, i.e. far below double precision here.
    """
    big_l = LN2 - math.log(x)
    amu = abs(mu)
    if amu < 1e-14:
        lk0 = math.log(big_l - EULER)
    elif amu < 0.01:
        # lgamma(1+a) - lgamma(1-a) by its odd series; direct differencing
        # loses absolute precision near the lgamma zero at 1
        a2 = amu * amu
        lgdiff = -2.0 * amu * (EULER + a2 * (0.40068563438653143 + a2 * 0.20738555102867398))
        dlt = 2.0 * amu * big_l + lgdiff
        bterm = math.exp(-amu * big_l - math.lgamma(1.0 + amu))
        k0 = math.pi * bterm * math.expm1(dlt) / (2.0 * math.sin(math.pi * amu))
        lk0 = math.log(k0)
    else:
        dlt = 2.0 * amu * big_l + math.lgamma(1.0 + amu) - math.lgamma(1.0 - amu)
        lk0 = (
            math.log(math.pi / (2.0 * math.sin(math.pi * amu)))
            + amu * big_l
            - math.lgamma(1.0 - amu)
            + math.log1p(-math.exp(-dlt))
        )
    o1 = 1.0 + mu
    lk1 = math.lgamma(o1) - LN2 + o1 * big_l
    return lk0, lk1


@kernel
def _log_bessel_k(nu, x):
    nu = abs(nu)
    n = int(nu + 0.5)
    mu = nu - n
    if x < 1e-100:
        lk0, lk1 = _tiny_arg_logk_pair(mu, x)
    elif x <= 2.0:
        k0, k1 = _temme_k_pair(mu, x)
        lk0 = math.log(k0)
        lk1 = math.log(k1)
    else:
        lk0, lk1 = _cf2_logk_pair(mu, x)
    if n == 0:
        return lk0
    for j in range(1, n):
        nu_j = mu + j
        lk0, lk1 = lk1, _logaddexp(lk0, math.log(2.0 * nu_j / x) + lk1)
    return lk1


@kernel
def _dlog_bessel_k_dorder(nu, x):
    h = 1e-5 * max(1.0, abs(nu))
    return (_log_bessel_k(nu + h, x) - _log_bessel_k(nu - h, x)) / (2.0 * h)


def digamma(x):
    """psi(x) for x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"digamma requires finite x > 0, got {x}")
    return _digamma(x)


def trigamma(x):
    """psi'(x) for x > 0 (Newton helper, ~1e-12 accuracy)."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"trigamma requires finite x > 0, got {x}")
    return _trigamma(x)


def inverse_digamma(y):
    """Unique x > 0 with digamma(x) = y."""
    y = float(y)
    if not math.isfinite(y):
        raise DomainError(f"inverse_digamma requires finite y, got {y}")
    x = _inverse_digamma(y)
    if x <= 0.0:
        raise NumericError(f"inverse_digamma failed to converge for y={y}")
    return x


def log_bessel_k(order, arg):
    """log K_order(arg) for arg > 0; K is even in the order."""
    order = float(order)
    arg = float(arg)
    if not math.isfinite(arg) or arg <= 0.0:
        raise DomainError(f"log_bessel_k requires finite arg > 0, got {arg}")
    if not math.isfinite(order):
        raise DomainError(f"log_bessel_k requires finite order, got {order}")
    return _log_bessel_k(order, arg)


def dlog_bessel_k_dorder(order, arg):
    """d/d(order) log K_order(arg), central difference; odd in the order."""
    order = float(order)
    arg = float(arg)
    if not math.isfinite(arg) or arg <= 0.0:
        raise DomainError(f"dlog_bessel_k_dorder requires finite arg > 0, got {arg}")
    if not math.isfinite(order):
        raise DomainError(f"dlog_bessel_k_dorder requires finite order, got {order}")
    return _dlog_bessel_k_dorder(order, arg)
