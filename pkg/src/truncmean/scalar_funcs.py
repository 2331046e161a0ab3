"""Scalar ancillary functions: influence functions, their envelopes, and the
standard normal quantile.

All functions accept floats or numpy arrays and are pure; everything here is
safe for unrestricted concurrent use.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "TruncationKind",
    "CLIP_LAMBDA",
    "CLIP_A",
    "t_smooth",
    "t_envelopes",
    "log_quad_envelope_check",
    "g_gap",
    "phi",
    "h_ancillary",
    "l_clipped",
    "l_envelopes",
    "normal_cdf",
    "normal_quantile",
    "T_SUP",
]

# sup |t_smooth| over the real line, attained at +-sqrt(2)
T_SUP = math.log(1.0 + math.sqrt(2.0))


def _solve_clip_lambda() -> float:
    """Positive root of -(1/u) log(1 - u^2 / (4 [exp(u)-1-u])) = 1.

    Bisection on [0.4, 0.7] to 1e-14; the root is known to lie in
    [0.535, 0.536] only to two decimals, so we pin it once here.
    """

    def f(u: float) -> float:
        return -math.log(1.0 - u * u / (4.0 * (math.expm1(u) - u))) / u - 1.0

    lo, hi = 0.4, 0.7
    if not (f(lo) > 0.0 > f(hi)):  # f is decreasing on this bracket
        raise NumericalError("clip-lambda bracket lost its sign change")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


CLIP_LAMBDA = _solve_clip_lambda()
CLIP_A = 2.0 * (math.expm1(CLIP_LAMBDA) - CLIP_LAMBDA) / CLIP_LAMBDA**2


class TruncationKind(enum.Enum):
    """Which bounded influence function the truncated mean runs through."""

    SMOOTH = "smooth"
    CLIPPED = "clipped"

    @property
    def clip_lambda(self) -> float:
        return CLIP_LAMBDA

    @property
    def clip_a(self) -> float:
        return CLIP_A


def t_smooth(x):
    """Smooth odd influence function (1/2) log[(1+x+x^2/2) / (1-x+x^2/2)].

    Bounded in absolute value by log(1+sqrt(2)); both log arguments are
    >= 1/2 for every real x, so the formula never degenerates.
    """
    x = np.asarray(x, dtype=float)
    val = 0.5 * (np.log(1.0 + x + 0.5 * x * x) - np.log(1.0 - x + 0.5 * x * x))
    return val if val.ndim else float(val)


def t_envelopes(x):
    """Lower/upper envelopes (-log(1-x+x^2/2), log(1+x+x^2/2)) of t_smooth."""
    x = np.asarray(x, dtype=float)
    lower = -np.log(1.0 - x + 0.5 * x * x)
    upper = np.log(1.0 + x + 0.5 * x * x)
    if lower.ndim:
        return lower, upper
    return float(lower), float(upper)


def log_quad_envelope_check(x):
    """Residual r(x) = log(1+x+x^2/2) - x + x^3/6 packaged as the pair
    (r + x^4/38, x^4/6 - r); both components are nonnegative for all x.
    """
    x = np.asarray(x, dtype=float)
    r = np.log(1.0 + x + 0.5 * x * x) - x + x**3 / 6.0
    lo = r + x**4 / 38.0
    hi = x**4 / 6.0 - r
    if lo.ndim:
        return lo, hi
    return float(lo), float(hi)


def g_gap(x):
    """g(x) = x - t_smooth(x); satisfies |g| <= min(|x|^3/5, 3x^2/10, |x|)."""
    x = np.asarray(x, dtype=float)
    val = x - t_smooth(x)
    return val if np.ndim(val) else float(val)


def phi(x):
    """2x / (1 + sqrt(1-4x)) for x <= 1/4, +inf otherwise.

    The +inf branch is a documented return value (an infeasible width),
    not an error.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore"):
        val = np.where(
            x <= 0.25,
            2.0 * x / (1.0 + np.sqrt(np.maximum(1.0 - 4.0 * x, 0.0))),
            np.inf,
        )
    return val if val.ndim else float(val)


def h_ancillary(a: float, y: float, *, clamp_tol: float = 0.0) -> float:
    """4y / [(1+y)(1 + sqrt(1 - 4ay^2/(1+y)^2))].

    Raises DomainError when the discriminant 1 - 4ay^2/(1+y)^2 is negative.
    `clamp_tol` tolerates tiny negative discriminants (floating point noise at
    the admissibility boundary) by clamping them to zero.
    """
    if a <= 0.0:
        raise DomainError(f"h_ancillary needs a > 0, got a={a}")
    if y < 0.0:
        raise DomainError(f"h_ancillary needs y >= 0, got y={y}")
    disc = 1.0 - 4.0 * a * y * y / (1.0 + y) ** 2
    if disc < 0.0:
        if disc >= -clamp_tol:
            disc = 0.0
        else:
            raise DomainError(
                f"h_ancillary discriminant negative: a={a}, y={y}, disc={disc}"
            )
    return 4.0 * y / ((1.0 + y) * (1.0 + math.sqrt(disc)))


def l_clipped(x):
    """Hard clip to [-1, 1]."""
    x = np.asarray(x, dtype=float)
    val = np.clip(x, -1.0, 1.0)
    return val if val.ndim else float(val)


def l_envelopes(x):
    """Envelopes of the hard clip:
    upper(x) = (1/lam) log{1 + lam x + [exp(lam)-1-lam] x^2}, lower = -upper(-x).
    """
    x = np.asarray(x, dtype=float)
    lam = CLIP_LAMBDA
    b = math.expm1(lam) - lam

    def up(z):
        arg = 1.0 + lam * z + b * z * z
        if np.any(arg <= 0.0):
            # analytically impossible: discriminant lam^2 - 4b < 0
            raise NumericalError("clip envelope log argument <= 0")
        return np.log(arg) / lam

    lower = -up(-x)
    upper = up(x)
    if np.ndim(x):
        return lower, upper
    return float(lower), float(upper)


# --- standard normal distribution function and quantile ---------------------
#
# Own implementation (no scipy here): erfc through a confluent power series
# for small arguments and a Lentz-evaluated continued fraction in the tail.
# Accuracy target ~1e-13 so the quantile meets its 1e-10 contract.

_SQRT_PI = math.sqrt(math.pi)
_SERIES_CUT = 2.2


def _erfc_pos(x: float) -> float:
    """erfc(x) for x >= 0."""
    if x < _SERIES_CUT:
        # erf(x) = (2/sqrt(pi)) e^{-x^2} sum_k x^{2k+1} 2^k / (1*3*...*(2k+1))
        # all-positive series, no cancellation
        term = x
        total = x
        xx = 2.0 * x * x
        k = 0
        while True:
            k += 1
            term *= xx / (2 * k + 1)
            total += term
            if term <= 1e-18 * total:
                break
        return 1.0 - (2.0 / _SQRT_PI) * math.exp(-x * x) * total
    # continued fraction: sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    # partial numerators k/2, all partial denominators x; modified Lentz
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    for j in range(1, 300):
        a_j = 1.0 if j == 1 else (j - 1) / 2.0
        b_j = x
        d = b_j + a_j * d
        if d == 0.0:
            d = tiny
        c = b_j + a_j / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x * x) / _SQRT_PI * f


def normal_cdf(z: float) -> float:
    """Standard normal distribution function."""
    u = z / math.sqrt(2.0)
    if u >= 0.0:
        return 1.0 - 0.5 * _erfc_pos(u)
    return 0.5 * _erfc_pos(-u)


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal distribution function.

    Absolute error <= 1e-10; odd symmetry F^{-1}(p) = -F^{-1}(1-p) holds
    exactly by construction.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"normal_quantile needs p in (0,1), got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -normal_quantile(1.0 - p)
    lo, hi = -45.0, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)
