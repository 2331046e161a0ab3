"""One-shot truncated mean estimator and its closed-form confidence widths."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameter
from .scalar_funcs import CLIP_A, CLIP_LAMBDA, TruncationKind, l_clipped, t_smooth

__all__ = [
    "Sample",
    "PriorBounds",
    "ConfidenceEstimate",
    "AlphaPolicy",
    "truncated_mean",
    "width_prop31",
    "prop31_alpha",
    "width_prop32",
    "width_clipped",
    "AlphaWidth",
]


@dataclass(frozen=True)
class Sample:
    """Immutable ordered collection of finite real observations, n >= 1."""

    values: np.ndarray

    def __init__(self, values):
        arr = np.asarray(values, dtype=float).reshape(-1).copy()
        if arr.size < 1:
            raise InvalidParameter("sample must contain at least one observation")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameter("sample contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return float(self.values.mean())

    def shifted(self, t: float) -> "Sample":
        return Sample(self.values + t)


@dataclass(frozen=True)
class PriorBounds:
    """Known prior bounds: variance v0, location |theta0 - m| <= delta0, and
    optionally a uniform kurtosis bound c > 1."""

    v0: float = 0.0
    delta0: float = 0.0
    c: float | None = None

    def __post_init__(self):
        if self.v0 < 0.0 or self.delta0 < 0.0:
            raise InvalidParameter("prior bounds must be nonnegative")
        if self.c is not None and self.c <= 1.0:
            raise InvalidParameter("kurtosis prior c must exceed 1")


@dataclass(frozen=True)
class ConfidenceEstimate:
    """Point estimate with a half-width valid at miss probability 2*eps."""

    point: float
    half_width: float
    miss_probability: float
    feasible: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        # half_width is +inf exactly when the configuration is infeasible
        # or the bound formula diverges
        if self.half_width < 0.0:
            raise InvalidParameter("half_width must be nonnegative")
        if not (0.0 < self.miss_probability < 1.0):
            raise InvalidParameter("miss probability must lie in (0,1)")

    @property
    def interval(self) -> tuple[float, float]:
        return (self.point - self.half_width, self.point + self.half_width)


def truncated_mean(
    sample: Sample,
    theta0: float,
    alpha: float,
    kind: TruncationKind = TruncationKind.SMOOTH,
) -> float:
    """theta0 + (1/(n*alpha)) sum T[alpha (Y_i - theta0)] for the smooth kind;
    the clipped kind rescales by the clip constant lambda:
    theta0 + (lambda/(n*alpha)) sum L[(alpha/lambda)(Y_i - theta0)].

    Translation-equivariant and permutation-invariant in the sample.
    """
    if not (alpha > 0.0) or not math.isfinite(alpha):
        raise InvalidParameter(f"alpha must be positive and finite, got {alpha}")
    theta0 = float(theta0)
    resid = sample.values - theta0
    if kind is TruncationKind.SMOOTH:
        return theta0 + float(np.mean(t_smooth(alpha * resid))) / alpha
    lam = CLIP_LAMBDA
    return theta0 + lam * float(np.mean(l_clipped((alpha / lam) * resid))) / alpha


class AlphaPolicy(enum.Enum):
    """How alpha is chosen in the first-proposition width."""

    USER = "user"
    EPS_DEPENDENT = "eps-dependent"  # alpha = sqrt(2 log(1/eps) / (n v0))
    EPS_FREE = "eps-free"            # alpha = sqrt(2 / (n v0))


def prop31_alpha(policy: AlphaPolicy, n: int, v0: float, epsilon: float) -> float:
    if v0 <= 0.0:
        raise InvalidParameter("v0 must be positive for a derived alpha")
    if policy is AlphaPolicy.EPS_DEPENDENT:
        return math.sqrt(2.0 * math.log(1.0 / epsilon) / (n * v0))
    if policy is AlphaPolicy.EPS_FREE:
        return math.sqrt(2.0 / (n * v0))
    raise InvalidParameter("USER policy carries its own alpha")


def width_prop31(
    n: int,
    v0: float,
    delta0: float,
    alpha: float,
    epsilon: float,
    policy: AlphaPolicy = AlphaPolicy.USER,
) -> float:
    """Half-width alpha*v0/2 + log(1/eps)/(n*alpha)
    + (alpha^2 delta0 / 2)(1 + alpha delta0)(delta0^2/3 + v0).

    With a non-USER policy the alpha argument is ignored and the
    corresponding closed-form display is evaluated instead.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise InvalidParameter(f"epsilon must lie in (0,1), got {epsilon}")
    L = math.log(1.0 / epsilon)
    if policy is AlphaPolicy.EPS_DEPENDENT:
        return (
            math.sqrt(2.0 * v0 * L / n)
            + L * delta0 / (3.0 * n * v0) * (delta0**2 + 3.0 * v0)
            * (1.0 + delta0 * math.sqrt(2.0 * L / (n * v0)))
        )
    if policy is AlphaPolicy.EPS_FREE:
        return (
            (1.0 + L) * math.sqrt(v0 / (2.0 * n))
            + delta0 / (3.0 * n * v0) * (delta0**2 + 3.0 * v0)
            * (1.0 + delta0 * math.sqrt(2.0 / (n * v0)))
        )
    if not (alpha > 0.0):
        raise InvalidParameter(f"alpha must be positive, got {alpha}")
    return (
        alpha * v0 / 2.0
        + L / (n * alpha)
        + 0.5 * alpha**2 * delta0 * (1.0 + alpha * delta0) * (delta0**2 / 3.0 + v0)
    )


class AlphaWidth(NamedTuple):
    alpha: float
    half_width: float


def width_prop32(n: int, v0: float, delta0: float, epsilon: float) -> AlphaWidth:
    """alpha = sqrt(2 log(1/eps) / (n (v0 + delta0^2))) and the matching
    half-width sqrt(2 (v0 + delta0^2) log(1/eps) / n)."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise InvalidParameter(f"epsilon must lie in (0,1), got {epsilon}")
    s = v0 + delta0 * delta0
    if s <= 0.0:
        raise InvalidParameter("v0 + delta0^2 must be positive")
    L = math.log(1.0 / epsilon)
    if L == 0.0:
        # eps -> 1 limit: width 0, alpha degenerate; report alpha of eps-free scale
        return AlphaWidth(math.sqrt(2.0 / (n * s)), 0.0)
    return AlphaWidth(math.sqrt(2.0 * L / (n * s)), math.sqrt(2.0 * s * L / n))


def width_clipped(n: int, v0: float, delta0: float, epsilon: float) -> AlphaWidth:
    """Clipped-truncation analogue: width sqrt(a) times the smooth one, with
    alpha = sqrt(2 log(1/eps) / (a (v0+delta0^2) n)); sqrt(a) <= 1.1."""
    base = width_prop32(n, v0, delta0, epsilon)
    return AlphaWidth(base.alpha / math.sqrt(CLIP_A), math.sqrt(CLIP_A) * base.half_width)
