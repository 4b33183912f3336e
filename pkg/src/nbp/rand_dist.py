"""Seedable random variates for the model's full conditionals.

A small self-contained generator (splitmix64-seeded xoshiro256**) backs every
draw so that streams are reproducible bit-for-bit whether the kernels run
jitted or as plain Python (see ``nbp._jit``).  Distinct ``(seed, stream)``
pairs give statistically independent sequences, which is how replications and
worker threads get their own generators.

Distributions: uniform, normal (Box-Muller), gamma (Marsaglia-Tsang),
inverse gamma, and the three-parameter generalized inverse Gaussian with
density f(x) proportional to x^(order-1) exp(-(chi/x + psi*x)/2).  GIG
sampling follows Hoermann & Leydold: ratio-of-uniforms with mode shift for
order >= 1 or omega > 1, plain ratio-of-uniforms for moderate omega, and a
three-piece hat decomposition for the near-singular small-omega regime (the
mode-shifted rejection rate degenerates there, so all three regimes are
needed to cover the full parameter space).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._jit import kernel
from .errors import DomainError
from .specfun import _digamma, _dlog_bessel_k_dorder, _log_bessel_k

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM_MULT = np.uint64(0xA24BAED4963EE407)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U45 = np.uint64(45)
_U64 = np.uint64(64)
_FIVE = np.uint64(5)
_NINE = np.uint64(9)
_TWO_PI = 6.283185307179586477
_INV_2_53 = 1.1102230246251565404e-16  # 2^-53
_CHI_FLOOR = 1e-300


@kernel
def _seed_state(s, seed, stream):
    v = seed ^ (stream * _STREAM_MULT)
    for i in range(4):
        v = v + _GOLD
        z = v
        z = (z ^ (z >> _U30)) * _MIX1
        z = (z ^ (z >> _U27)) * _MIX2
        s[i] = z ^ (z >> _U31)
    if s[0] == np.uint64(0) and s[1] == np.uint64(0) and s[2] == np.uint64(0) and s[3] == np.uint64(0):
        s[0] = _GOLD


@kernel
def _next_u64(s):
    x = s[1] * _FIVE
    result = ((x << np.uint64(7)) | (x >> np.uint64(57))) * _NINE
    t = s[1] << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U45) | (s[3] >> np.uint64(19))
    return result


@kernel
def _next_double(s):
    return (float(_next_u64(s) >> _U11) + 0.5) * _INV_2_53


@kernel
def _next_normal(s):
    u1 = _next_double(s)
    u2 = _next_double(s)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@kernel
def _std_gamma(s, shape):
    """Gamma(shape, rate=1) draw; Marsaglia-Tsang with the shape<1 boost."""
    boost = 1.0
    if shape < 1.0:
        boost = _next_double(s) ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _next_normal(s)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _next_double(s)
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return boost * d * v
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return boost * d * v


@kernel
def _gig_mode(lam, omega):
    if lam >= 1.0:
        return (math.sqrt((lam - 1.0) * (lam - 1.0) + omega * omega) + (lam - 1.0)) / omega
    return omega / (math.sqrt((1.0 - lam) * (1.0 - lam) + omega * omega) + (1.0 - lam))


@kernel
def _gig_rou_shift(s, lam, omega):
    """Ratio-of-uniforms with mode shift; lam >= 1 or omega > 1."""
    t = 0.5 * (lam - 1.0)
    sc = 0.25 * omega
    xm = _gig_mode(lam, omega)
    nc = t * math.log(xm) - sc * (xm + 1.0 / xm)
    # extrema of (x - xm) sqrt(g(x)): roots of a cubic, Cardano's casus irreducibilis
    a = -(2.0 * (lam + 1.0) / omega + xm)
    b = 2.0 * (lam - 1.0) * xm / omega - 1.0
    p = b - a * a / 3.0
    q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + xm
    arg = -q / (2.0 * math.sqrt(-(p * p * p) / 27.0))
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    fi = math.acos(arg)
    fak = 2.0 * math.sqrt(-p / 3.0)
    y1 = fak * math.cos(fi / 3.0) - a / 3.0
    y2 = fak * math.cos(fi / 3.0 + 4.0 / 3.0 * math.pi) - a / 3.0
    uplus = (y1 - xm) * math.exp(t * math.log(y1) - sc * (y1 + 1.0 / y1) - nc)
    uminus = (y2 - xm) * math.exp(t * math.log(y2) - sc * (y2 + 1.0 / y2) - nc)
    while True:
        u = uminus + _next_double(s) * (uplus - uminus)
        v = _next_double(s)
        x = u / v + xm
        if x > 0.0 and math.log(v) <= t * math.log(x) - sc * (x + 1.0 / x) - nc:
            return x


@kernel
def _gig_rou_noshift(s, lam, omega):
    """Plain ratio-of-uniforms; 0 <= lam < 1 and moderate omega <= 1."""
    t = 0.5 * (lam - 1.0)
    sc = 0.25 * omega
    xm = _gig_mode(lam, omega)
    nc = t * math.log(xm) - sc * (xm + 1.0 / xm)
    ym = (lam + 1.0 + math.sqrt((lam + 1.0) * (lam + 1.0) + omega * omega)) / omega
    um = math.exp(0.5 * (lam + 1.0) * math.log(ym) - sc * (ym + 1.0 / ym) - nc)
    while True:
        u = um * _next_double(s)
        v = _next_double(s)
        x = u / v
        if math.log(v) <= t * math.log(x) - sc * (x + 1.0 / x) - nc:
            return x


@kernel
def _gig_hat(s, lam, omega):
    """Three-piece hat rejection; 0 <= lam < 1 and small omega.

    Quasi-density g(x) = x^(lam-1) exp(-omega (x + 1/x) / 2) is bounded by
    g(mode) on (0, x0], by e^-omega x^(lam-1) on [x0, 2/omega] (since
    x + 1/x >= 2), and by (2/omega)^(lam-1) e^(-omega x / 2) beyond.
    """
    xm = _gig_mode(lam, omega)
    x0 = omega / (1.0 - lam)
    k0 = math.exp((lam - 1.0) * math.log(xm) - 0.5 * omega * (xm + 1.0 / xm))
    a0 = k0 * x0
    if x0 >= 2.0 / omega:
        # outside this regime's parameter range, kept as a guard
        k1 = 0.0
        a1 = 0.0
        big_l = 0.0
        x1 = x0
        k2 = math.exp((lam - 1.0) * math.log(x0))
        a2 = k2 * (2.0 / omega) * math.exp(-omega * x0 / 2.0)
    else:
        k1 = math.exp(-omega)
        big_l = math.log(2.0 / omega) - math.log(x0)
        if lam == 0.0:
            a1 = k1 * big_l
        else:
            a1 = k1 * math.exp(lam * math.log(x0)) * math.expm1(lam * big_l) / lam
        x1 = 2.0 / omega
        k2 = math.exp((lam - 1.0) * math.log(x1))
        a2 = k2 * (2.0 / omega) * math.exp(-1.0)
    atot = a0 + a1 + a2
    while True:
        v = atot * _next_double(s)
        if v <= a0:
            x = x0 * v / a0
            lhx = math.log(k0)
        elif v <= a0 + a1:
            w = (v - a0) / a1
            if lam == 0.0:
                x = x0 * math.exp(w * big_l)
            else:
                x = x0 * math.exp(math.log1p(w * math.expm1(lam * big_l)) / lam)
            lhx = math.log(k1) + (lam - 1.0) * math.log(x)
        else:
            w = (v - a0 - a1) / a2
            x = x1 - (2.0 / omega) * math.log1p(-w)
            lhx = math.log(k2) - 0.5 * omega * x
        u = _next_double(s)
        if math.log(u) + lhx <= (lam - 1.0) * math.log(x) - 0.5 * omega * (x + 1.0 / x):
            return x


@kernel
def _gig_std(s, lam, omega):
    """Standardized two-parameter GIG draw, lam >= 0, omega > 0."""
    if lam >= 1.0 or omega > 1.0:
        return _gig_rou_shift(s, lam, omega)
    thresh = (2.0 / 3.0) * math.sqrt(1.0 - lam)
    if thresh > 0.5:
        thresh = 0.5
    if omega >= thresh:
        return _gig_rou_noshift(s, lam, omega)
    return _gig_hat(s, lam, omega)


@kernel
def _sample_gig(s, chi, psi, lam):
    if lam <= 0.0 and chi < _CHI_FLOOR:
        chi = _CHI_FLOOR
    if chi == 0.0:
        out = 2.0 * _std_gamma(s, lam) / psi
    else:
        alpha = math.sqrt(chi / psi)
        omega = math.sqrt(chi * psi)
        if lam >= 0.0:
            out = alpha * _gig_std(s, lam, omega)
        else:
            out = alpha / _gig_std(s, -lam, omega)
    # draws are strictly positive; the floor only clips underflow at the
    # resolution the chi floor already imposes
    return out if out > _CHI_FLOOR else _CHI_FLOOR


@kernel
def _sample_inverse_gamma(s, shape, scale):
    return scale / _std_gamma(s, shape)


@kernel
def _fill_normals(s, out):
    for i in range(out.shape[0]):
        out[i] = _next_normal(s)


@kernel
def _fill_uniforms(s, out):
    for i in range(out.shape[0]):
        out[i] = _next_double(s)


@kernel
def _shuffle_inplace(s, a):
    for i in range(a.shape[0] - 1, 0, -1):
        j = int(_next_u64(s) % np.uint64(i + 1))
        tmp = a[i]
        a[i] = a[j]
        a[j] = tmp


class RngStream:
    """Owned, seedable generator; equal (seed, stream) means equal draws."""

    def __init__(self, seed, stream=0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF
        self.state = np.empty(4, dtype=np.uint64)
        _seed_state(self.state, np.uint64(self.seed), np.uint64(self.stream))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def substream(self, index):
        """Independent stream derived from the same seed."""
        return RngStream(self.seed, self.stream * 1000003 + 1 + int(index))

    def uniform(self):
        return _next_double(self.state)

    def normal(self):
        return _next_normal(self.state)

    def normal_vector(self, n):
        out = np.empty(n)
        _fill_normals(self.state, out)
        return out

    def uniform_vector(self, n):
        out = np.empty(n)
        _fill_uniforms(self.state, out)
        return out

    def gamma(self, shape):
        if not (shape > 0.0 and math.isfinite(shape)):
            raise DomainError(f"gamma shape must be positive, got {shape}")
        return _std_gamma(self.state, float(shape))

    def permutation(self, n):
        idx = np.arange(n, dtype=np.int64)
        _shuffle_inplace(self.state, idx)
        return idx

    def choice_without_replacement(self, n, k):
        """First k entries of a seeded Fisher-Yates pass over range(n)."""
        return np.sort(self.permutation(n)[:k])


@dataclass(frozen=True)
class GigParams:
    """Parameters of f(x) proportional to x^(order-1) exp(-(chi/x + psi x)/2)."""

    chi: float
    psi: float
    order: float

    def __post_init__(self):
        if not (math.isfinite(self.chi) and self.chi >= 0.0):
            raise DomainError(f"GIG chi must be finite and >= 0, got {self.chi}")
        if not (math.isfinite(self.psi) and self.psi > 0.0):
            raise DomainError(f"GIG psi must be finite and > 0, got {self.psi}")
        if not math.isfinite(self.order):
            raise DomainError(f"GIG order must be finite, got {self.order}")
        if self.chi == 0.0 and self.order <= 0.0:
            raise DomainError("GIG with chi = 0 requires order > 0")


def sample_gig(params, rng):
    """One GIG draw; chi = 0 with order > 0 reduces to Gamma(order, psi/2)."""
    return _sample_gig(rng.state, params.chi, params.psi, params.order)


def sample_inverse_gamma(shape, scale, rng):
    """Draw with density proportional to x^(-shape-1) exp(-scale/x)."""
    if not (shape > 0.0 and math.isfinite(shape)):
        raise DomainError(f"inverse gamma shape must be positive, got {shape}")
    if not (scale > 0.0 and math.isfinite(scale)):
        raise DomainError(f"inverse gamma scale must be positive, got {scale}")
    return _sample_inverse_gamma(rng.state, float(shape), float(scale))


@kernel
def _gig_expectations(chi, psi, order):
    omega = math.sqrt(chi * psi)
    half_log_ratio = 0.5 * (math.log(chi) - math.log(psi))
    lk = _log_bessel_k(order, omega)
    mean = math.exp(half_log_ratio + _log_bessel_k(order + 1.0, omega) - lk)
    inverse_mean = math.exp(-half_log_ratio + _log_bessel_k(order - 1.0, omega) - lk)
    log_mean = half_log_ratio + _dlog_bessel_k_dorder(order, omega)
    return mean, inverse_mean, log_mean


def gig_expectations(params):
    """(E[X], E[1/X], E[log X]) via Bessel ratios in log space; needs chi > 0."""
    if params.chi <= 0.0:
        raise DomainError(f"gig_expectations requires chi > 0, got {params.chi}")
    return _gig_expectations(params.chi, params.psi, params.order)


def inverse_gamma_expectations(shape, scale):
    """(E[1/X], E[log X]) for the inverse gamma density above."""
    if not (shape > 0.0 and math.isfinite(shape)):
        raise DomainError(f"inverse gamma shape must be positive, got {shape}")
    if not (scale > 0.0 and math.isfinite(scale)):
        raise DomainError(f"inverse gamma scale must be positive, got {scale}")
    return shape / scale, math.log(scale) - _digamma(shape)
