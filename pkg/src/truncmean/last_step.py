"""Last-step refinement: the root-defined estimator built on a smoothed
truncated criterion, with its closed-form width and feasibility conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Sample
from .errors import InvalidParameter, NoRoot, NumericalError
from .scalar_funcs import phi

__all__ = [
    "LastStepConfig",
    "m_alpha",
    "solve_root",
    "width_prop14",
    "width_general",
    "feasible_general",
    "eps2_sufficient",
    "default_beta",
    "LastStepWidth",
]


@dataclass(frozen=True)
class LastStepConfig:
    """Parameters of the last step.

    alpha=None selects the automatic choice
    alpha = sqrt((1/beta + 2 log(1/eps2)) / (n v0)).
    first_stage = (theta1, delta1, eps1) describes the preceding estimator,
    assumed to satisfy |m - theta1| <= delta1 with probability 1 - 2 eps1.
    """

    beta: float
    eps2: float
    theta1: float
    delta1: float
    eps1: float
    v0: float
    alpha: float | None = None

    def __post_init__(self):
        if self.beta <= 0.0:
            raise InvalidParameter("beta must be positive")
        if not (0.0 < self.eps2 < 1.0):
            raise InvalidParameter("eps2 must lie in (0,1)")
        if self.delta1 <= 0.0:
            raise InvalidParameter("delta1 must be positive")
        if self.v0 <= 0.0:
            raise InvalidParameter("v0 must be positive")
        if self.alpha is not None and self.alpha <= 0.0:
            raise InvalidParameter("alpha must be positive when given")

    def resolved_alpha(self, n: int) -> float:
        if self.alpha is not None:
            return self.alpha
        g = 1.0 / self.beta + 2.0 * math.log(1.0 / self.eps2)
        return math.sqrt(g / (n * self.v0))


def m_alpha(sample: Sample, theta0: float, alpha: float, beta: float) -> float:
    """(1/(n alpha)) sum log{1 + a r_i + a^2 r_i^2 / 2 + 1/(2 beta n)} with
    r_i = Y_i - theta0.  Continuous and eventually decreasing in theta0."""
    if alpha <= 0.0 or beta <= 0.0:
        raise InvalidParameter("alpha and beta must be positive")
    n = sample.n
    r = alpha * (sample.values - theta0)
    arg = 1.0 + r + 0.5 * r * r + 1.0 / (2.0 * beta * n)
    if np.any(arg <= 0.0):
        # 1 + z + z^2/2 >= 1/2 and the ridge term is positive, so this
        # cannot happen analytically
        raise NumericalError("criterion log argument <= 0")
    return float(np.sum(np.log(arg))) / (n * alpha)


def solve_root(sample: Sample, config: LastStepConfig) -> float:
    """Smallest theta >= theta1 - delta1 with M_alpha(theta) <= 0.

    Grid scan at resolution delta1/1024 over brackets expanding geometrically
    from delta1 up to 64*delta1 beyond theta1, then bisection to absolute
    tolerance max(1e-12, 1e-12 |theta1|).  Raises NoRoot if the criterion
    stays positive on the whole maximal bracket.
    """
    alpha = config.resolved_alpha(sample.n)
    left = config.theta1 - config.delta1
    crit = lambda th: m_alpha(sample, th, alpha, config.beta)
    if crit(left) <= 0.0:
        return left

    step = config.delta1 / 1024.0
    tol = max(1e-12, 1e-12 * abs(config.theta1))
    lo = left
    span = config.delta1
    while span <= 64.0 * config.delta1:
        hi_limit = config.theta1 + span
        th = lo
        while th < hi_limit:
            nxt = min(th + step, hi_limit)
            if crit(nxt) <= 0.0:
                a, b = th, nxt  # sign change inside (a, b]
                while b - a > tol:
                    mid = 0.5 * (a + b)
                    if crit(mid) <= 0.0:
                        b = mid
                    else:
                        a = mid
                return b
            th = nxt
        lo = hi_limit
        span *= 2.0
    raise NoRoot(
        f"criterion positive on [{left}, {config.theta1 + 64.0 * config.delta1}] "
        f"(alpha={alpha}, beta={config.beta})"
    )


class LastStepWidth(NamedTuple):
    alpha: float
    half_width: float
    feasible: bool


def width_prop14(n: int, v0: float, beta: float, eps2: float, delta1: float) -> LastStepWidth:
    """Automatic-alpha width and feasibility.

    With g = 1/beta + 2 log(1/eps2):
      alpha      = sqrt(g / (n v0)),
      half_width = 2/(1+beta) * sqrt(n v0 / g) * phi((1+beta) g / (2n)),
      feasible  <=>  2 delta1 <= sqrt(g v0 / n) / phi((1+beta) g / (2n)),
    the width being +inf (and the configuration infeasible) whenever phi's
    argument exceeds 1/4.
    """
    if beta <= 0.0 or v0 <= 0.0 or delta1 < 0.0:
        raise InvalidParameter("beta, v0 must be positive and delta1 nonnegative")
    if not (0.0 < eps2 < 1.0):
        raise InvalidParameter("eps2 must lie in (0,1)")
    g = 1.0 / beta + 2.0 * math.log(1.0 / eps2)
    alpha = math.sqrt(g / (n * v0))
    p = phi((1.0 + beta) * g / (2.0 * n))
    if not math.isfinite(p) or p <= 0.0:
        return LastStepWidth(alpha, math.inf, False)
    half = 2.0 / (1.0 + beta) * math.sqrt(n * v0 / g) * p
    feasible = 2.0 * delta1 <= math.sqrt(g * v0 / n) / p
    return LastStepWidth(alpha, half, feasible)


def width_general(n: int, v0: float, beta: float, alpha: float, eps2: float) -> float:
    """Width at a user-chosen alpha:
    2/((1+beta) alpha) * phi((1+beta)[n alpha^2 v0 + 1/beta + 2 log(1/eps2)]/(4n))."""
    g = n * alpha * alpha * v0 + 1.0 / beta + 2.0 * math.log(1.0 / eps2)
    p = phi((1.0 + beta) * g / (4.0 * n))
    if not math.isfinite(p):
        return math.inf
    return 2.0 / ((1.0 + beta) * alpha) * p


def feasible_general(
    n: int, v0: float, beta: float, alpha: float, eps2: float, delta1: float
) -> bool:
    """General-alpha feasibility:
    4 n alpha delta1 <= g / phi((1+beta) g / (4n)) with
    g = n alpha^2 v0 + 1/beta + 2 log(1/eps2)."""
    g = n * alpha * alpha * v0 + 1.0 / beta + 2.0 * math.log(1.0 / eps2)
    p = phi((1.0 + beta) * g / (4.0 * n))
    if not math.isfinite(p) or p <= 0.0:
        return False
    return 4.0 * n * alpha * delta1 <= g / p


def eps2_sufficient(n: int, v0: float, beta: float, delta1: float) -> float:
    """eps2 at or above this value is guaranteed feasible:
    exp(1/(2 beta) - n v0 / (2 (1+beta)^2 delta1^2 + 8 (1+beta) v0))."""
    return math.exp(
        1.0 / (2.0 * beta)
        - n * v0 / (2.0 * (1.0 + beta) ** 2 * delta1**2 + 8.0 * (1.0 + beta) * v0)
    )


def default_beta(
    n: int, v0: float, eps2: float, delta1: float, grid_points: int = 64
) -> tuple[float, LastStepWidth]:
    """Feasible minimizer of the automatic width over a log grid in
    [0.01, 100]; falls back to the unconstrained minimizer when nothing on
    the grid is feasible."""
    betas = np.logspace(-2.0, 2.0, grid_points)
    best = None
    best_any = None
    for b in betas:
        w = width_prop14(n, v0, float(b), eps2, delta1)
        if best_any is None or w.half_width < best_any[1].half_width:
            best_any = (float(b), w)
        if w.feasible and (best is None or w.half_width < best[1].half_width):
            best = (float(b), w)
    return best if best is not None else best_any
