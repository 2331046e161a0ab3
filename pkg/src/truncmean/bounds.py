"""Closed-form comparison curves: empirical-mean upper bounds, the Gaussian
minimax benchmark, and the worst-case lower bounds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DomainError, InvalidParameter
from .scalar_funcs import normal_quantile

__all__ = [
    "chebyshev_width",
    "kurtosis_upper_width",
    "fourth_moment_width",
    "gaussian_benchmark_width",
    "lower_bound_variance",
    "lower_bound_kurtosis",
    "CurveKind",
    "BoundCurve",
    "default_eps_grid",
]


def _check_eps(eps: float) -> None:
    if not (0.0 < eps < 1.0):
        raise InvalidParameter(f"epsilon must lie in (0,1), got {eps}")


def chebyshev_width(n: int, v: float, eps: float) -> float:
    """sqrt(v / (2 eps n)): the second-moment deviation of the empirical mean."""
    _check_eps(eps)
    return math.sqrt(v / (2.0 * eps * n))


def kurtosis_upper_width(n: int, kappa: float, eps: float) -> float:
    """Empirical-mean deviation under a kurtosis bound, in units of sqrt(v):

    2 L sqrt(kappa) / (5 n) + sqrt(2 L / n)
      + (3 kappa / (2 eps n^3))^{1/4}
        (1 + 3^5 (n-1) L^2 kappa / (2500 n^2)
           + 12 sqrt(2) L^{3/2} sqrt(kappa) / (25 n^{3/2}))^{1/4},
    with L = log(3/(2 eps)).
    """
    _check_eps(eps)
    if kappa < 1.0:
        raise InvalidParameter("kappa must be >= 1")
    if n < 2:
        raise InvalidParameter("n must be >= 2")
    L = math.log(1.5 / eps)
    sk = math.sqrt(kappa)
    inner = (
        1.0
        + 3.0**5 * (n - 1) * L * L * kappa / (2500.0 * n * n)
        + 12.0 * math.sqrt(2.0) * L**1.5 * sk / (25.0 * n**1.5)
    )
    return (
        2.0 * L * sk / (5.0 * n)
        + math.sqrt(2.0 * L / n)
        + (3.0 * kappa / (2.0 * eps * n**3)) ** 0.25 * inner**0.25
    )


def fourth_moment_width(n: int, kappa: float, eps: float) -> float:
    """Fourth-moment Chebyshev width of the empirical mean, in units of
    sqrt(v): ((3(n-1)+kappa)/(2 n eps))^{1/4} sqrt(1/n)."""
    _check_eps(eps)
    if kappa < 1.0:
        raise InvalidParameter("kappa must be >= 1")
    return ((3.0 * (n - 1) + kappa) / (2.0 * n * eps)) ** 0.25 / math.sqrt(n)


def gaussian_benchmark_width(n: int, v: float, eps: float) -> float:
    """sqrt(v/n) times the (1-eps) standard normal quantile; the minimax
    floor for symmetric confidence intervals."""
    if not (0.0 < eps < 0.5):
        raise DomainError(f"benchmark needs eps in (0, 1/2), got {eps}")
    return math.sqrt(v / n) * normal_quantile(1.0 - eps)


def lower_bound_variance(n: int, v: float, eps: float) -> float:
    """sqrt(v/(2 n eps)) (1 - 2 e eps / n)^{(n-1)/2}, for eps <= 1/(2e):
    a deviation no estimator-free empirical mean can beat under variance v."""
    if not (0.0 < eps <= 1.0 / (2.0 * math.e)):
        raise DomainError(f"needs eps in (0, 1/(2e)], got {eps}")
    return math.sqrt(v / (2.0 * n * eps)) * (1.0 - 2.0 * math.e * eps / n) ** (
        (n - 1) / 2.0
    )


def lower_bound_kurtosis(n: int, c: float, eps: float) -> float:
    """((c-1)/(4 n^3 eps))^{1/4} (1 - 4 e eps / n)^{(n-1)/4}, for
    c >= 1 + 1/n and eps <= 1/(4e), in units of sqrt(v)."""
    if c < 1.0 + 1.0 / n:
        raise DomainError(f"needs c >= 1 + 1/n, got c={c}, n={n}")
    if not (0.0 < eps <= 1.0 / (4.0 * math.e)):
        raise DomainError(f"needs eps in (0, 1/(4e)], got {eps}")
    return ((c - 1.0) / (4.0 * n**3 * eps)) ** 0.25 * (
        1.0 - 4.0 * math.e * eps / n
    ) ** ((n - 1) / 4.0)


class CurveKind(enum.Enum):
    UPPER_DEVIATION = "upper-deviation"
    LOWER_DEVIATION = "lower-deviation"
    BENCHMARK = "benchmark"


@dataclass(frozen=True)
class BoundCurve:
    """Half-width tabulated against a strictly decreasing epsilon grid."""

    name: str
    kind: CurveKind
    points: tuple  # ((eps, half_width), ...)

    def __post_init__(self):
        es = [e for e, _ in self.points]
        if any(b >= a for a, b in zip(es, es[1:])):
            raise InvalidParameter("epsilon grid must be strictly decreasing")
        if any(w < 0.0 for _, w in self.points):
            raise InvalidParameter("half-widths must be nonnegative")

    @staticmethod
    def tabulate(
        name: str,
        kind: CurveKind,
        fn: Callable[[float], float],
        eps_grid: Sequence[float],
    ) -> "BoundCurve":
        """Evaluate fn over the grid; out-of-domain points become +inf."""
        pts = []
        for e in eps_grid:
            try:
                pts.append((e, fn(e)))
            except DomainError:
                pts.append((e, math.inf))
        return BoundCurve(name=name, kind=kind, points=tuple(pts))


def default_eps_grid() -> tuple:
    """57 epsilons log-spaced 4 per decade from 1e-1 down to 1e-15."""
    return tuple(10.0 ** (-(1.0 + j / 4.0)) for j in range(57))
