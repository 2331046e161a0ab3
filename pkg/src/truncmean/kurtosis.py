"""Mean and variance estimation under a uniform kurtosis prior bound.

The scheme alternates variance-proxy steps (inverting the monotone criterion
Q) and truncated-mean steps, with multiplicative jitter on the proxy and
additive jitter on the location.  The odd-step constants delta, zeta and the
gamma sequence are deterministic; alpha and zeta at even steps depend on the
data through the proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConfidenceEstimate, Sample, truncated_mean
from .errors import AdmissibilityError, DomainError, InvalidParameter, NoRoot
from .iterated import JitterSource
from .scalar_funcs import TruncationKind, h_ancillary

__all__ = [
    "kappa_c_bounds",
    "c_symmetric",
    "q_eval",
    "q_inverse",
    "admissibility_bound",
    "KurtosisPrelude",
    "KurtosisScheduleState",
    "kurtosis_prelude",
    "run_kurtosis_scheme",
    "zeta_bound",
]


def kappa_c_bounds(kappa: float) -> tuple[float, float]:
    """Bracket for the uniform kurtosis in terms of the classical one:
    kappa <= c <= (1/9)(sqrt(kappa) + 2 sqrt(kappa+3))^2 <= kappa + 2."""
    if kappa < 1.0:
        raise DomainError(f"kurtosis is always >= 1, got {kappa}")
    upper = (math.sqrt(kappa) + 2.0 * math.sqrt(kappa + 3.0)) ** 2 / 9.0
    return kappa, upper


def c_symmetric(kappa: float) -> float:
    """Uniform kurtosis of a skewless distribution with classical kurtosis
    kappa: kappa + (3-kappa)^2/(5-kappa) for kappa <= 3, kappa above."""
    if kappa < 1.0:
        raise DomainError(f"kurtosis is always >= 1, got {kappa}")
    if kappa >= 3.0:
        return kappa
    return kappa + (3.0 - kappa) ** 2 / (5.0 - kappa)


def q_eval(sample: Sample, theta: float, delta: float, alpha: float) -> float:
    """(1/n) sum log{1 + z_i + z_i^2/2} with z_i = alpha (Y_i-theta)^2 - delta.

    Nondecreasing in alpha for delta in (0,1).
    """
    if not (0.0 < delta < 1.0):
        raise InvalidParameter(f"delta must lie in (0,1), got {delta}")
    if alpha < 0.0:
        raise InvalidParameter(f"alpha must be nonnegative, got {alpha}")
    z = alpha * (sample.values - theta) ** 2 - delta
    arg = 1.0 + z + 0.5 * z * z
    # z >= -delta > -1 so arg >= 1/2 analytically; no defensive branch needed
    return float(np.mean(np.log(arg)))


def q_inverse(sample: Sample, theta: float, delta: float, target: float) -> float:
    """alpha* >= 0 with q_eval(alpha*) = target, to relative tolerance 1e-12.

    Doubling bracket then bisection; raises NoRoot when the sample is
    constant at theta (flat criterion) or target <= q_eval(0).
    """
    sq = (sample.values - theta) ** 2
    msq = float(sq.mean())
    if msq == 0.0:
        raise NoRoot("sample constant at theta: criterion is flat in alpha")
    q0 = q_eval(sample, theta, delta, 0.0)
    if target <= q0:
        raise NoRoot(f"target {target} not above Q(0) = {q0}")
    tol = 1e-12 * max(1.0, abs(target))
    hi = delta / msq if msq > 0 else 1.0
    while q_eval(sample, theta, delta, hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise NoRoot("criterion never reaches the target")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        qm = q_eval(sample, theta, delta, mid)
        if abs(qm - target) <= tol:
            return mid
        if qm < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def admissibility_bound(c: float) -> float:
    """Largest admissible odd-step delta: 1 / (2 sqrt(c(c-1)) - (c-1))."""
    if c <= 1.0:
        raise InvalidParameter("c must exceed 1")
    return 1.0 / (2.0 * math.sqrt(c * (c - 1.0)) - (c - 1.0))


def _check_kurtosis_lists(eps, x):
    eps = tuple(float(e) for e in eps)
    x = tuple(float(xi) for xi in x)
    if len(eps) < 2 or len(eps) % 2:
        raise InvalidParameter("eps must have an even length 2k >= 2")
    if len(x) != len(eps) - 1:
        raise InvalidParameter(
            f"x needs 2k-1 = {len(eps) - 1} entries (indices 2..2k), got {len(x)}"
        )
    if any(not (0.0 < e < 1.0) for e in eps):
        raise InvalidParameter("every eps_i must lie in (0,1)")
    if any(xi <= 0.0 for xi in x):
        raise InvalidParameter("every x_i must be positive")
    return eps, x


@dataclass(frozen=True)
class KurtosisPrelude:
    """Deterministic constants, known prior to observing the sample."""

    n: int
    c: float
    eps: tuple
    x: tuple
    gamma: tuple       # gamma_1..gamma_2k (gamma_1 = 0)
    delta_odd: tuple   # delta_1, delta_3, ..., delta_{2k-1}
    zeta_odd: tuple    # zeta_1, zeta_3, ..., zeta_{2k-1}

    @property
    def k(self) -> int:
        return len(self.eps) // 2

    @property
    def total_miss(self) -> float:
        return 2.0 * sum(self.eps)


def kurtosis_prelude(n: int, c: float, eps, x) -> KurtosisPrelude:
    """Compute gamma, odd-step delta and zeta; check admissibility.

    gamma accumulates: gamma_i = sum_{j=2}^{i} log(1 + 1/x_j).
    """
    eps, x = _check_kurtosis_lists(eps, x)
    if c <= 1.0:
        raise InvalidParameter("c must exceed 1")
    k = len(eps) // 2
    gamma = [0.0]
    for idx in range(2, 2 * k + 1):
        gamma.append(gamma[-1] + math.log(1.0 + 1.0 / x[idx - 2]))
    bound = admissibility_bound(c)
    delta_odd, zeta_odd = [], []
    for i in range(1, k + 1):
        idx = 2 * i - 1
        L = math.log(1.0 / eps[idx - 1]) + gamma[idx - 1]
        d = math.sqrt(2.0 * L / ((c - 1.0) * n))
        if d > bound:
            raise AdmissibilityError(
                f"delta_{idx} = {d:.6g} exceeds the admissible bound {bound:.6g} "
                f"(n={n}, c={c}); increase eps, n, or reduce k"
            )
        z = -0.5 * math.log1p(
            -h_ancillary(c / (c - 1.0), (c - 1.0) * d, clamp_tol=1e-12)
        )
        delta_odd.append(d)
        zeta_odd.append(z)
    return KurtosisPrelude(
        n=n, c=c, eps=eps, x=x,
        gamma=tuple(gamma), delta_odd=tuple(delta_odd), zeta_odd=tuple(zeta_odd),
    )


@dataclass
class KurtosisScheduleState:
    """Full trace of one run: deterministic prelude plus data-dependent
    theta, q, alpha and even-step zeta values (indexed 1..2k)."""

    prelude: KurtosisPrelude
    theta: list = field(default_factory=list)   # theta_1..theta_{2k}
    q: list = field(default_factory=list)       # q_1..q_{2k}
    alpha_even: list = field(default_factory=list)  # alpha_2, alpha_4, ...
    zeta_even: list = field(default_factory=list)   # zeta_2, zeta_4, ...


def run_kurtosis_scheme(
    sample: Sample,
    theta1: float,
    c: float,
    eps,
    x,
    jitter: JitterSource | None = None,
    kind: TruncationKind = TruncationKind.SMOOTH,
) -> tuple[ConfidenceEstimate, tuple[float, float], KurtosisScheduleState]:
    """Alternating variance-proxy / mean recursion.

    Returns the mean estimate theta_{2k} with observable half-width zeta_{2k},
    the variance interval
    [exp(-zeta_{2k-1}) q_{2k-1} - (1+x_{2k-1})^2 zeta_{2k-2}^2,
     exp(+zeta_{2k-1}) q_{2k-1}], and the full state.  The jitter stream is
    consumed in index order U_2, U_3, ..., U_{2k}.
    """
    pre = kurtosis_prelude(sample.n, c, eps, x)
    k = pre.k
    if k < 2:
        raise InvalidParameter("variance interval needs k >= 2 (eps of length >= 4)")
    eps, x = pre.eps, pre.x
    gamma = pre.gamma
    u = (
        [float(v) for v in jitter.uniforms(2 * k - 1)]
        if jitter is not None
        else [0.0] * (2 * k - 1)
    )
    state = KurtosisScheduleState(prelude=pre)

    n = sample.n
    theta = [None] * (2 * k + 1)  # 1-based
    q = [None] * (2 * k + 1)
    theta[1] = float(theta1)
    d1, z1 = pre.delta_odd[0], pre.zeta_odd[0]
    q[1] = d1 * math.exp(-z1) / q_inverse(sample, theta[1], d1, -(c - 1.0) * d1 * d1)

    for i in range(1, k + 1):
        if i > 1:
            idx = 2 * i - 1
            d, z = pre.delta_odd[i - 1], pre.zeta_odd[i - 1]
            theta[idx] = theta[idx - 1] + state.zeta_even[-1] * x[idx - 2] * u[idx - 2]
            q[idx] = d * math.exp(-z) / q_inverse(
                sample, theta[idx], d, -(c - 1.0) * d * d
            )
        idx = 2 * i
        z_prev = pre.zeta_odd[i - 1]
        q[idx] = q[idx - 1] * math.exp(x[idx - 2] * z_prev * u[idx - 2])
        L = math.log(1.0 / eps[idx - 1]) + gamma[idx - 1]
        inflate = math.exp(0.5 * (1.0 + x[idx - 2]) * z_prev)
        alpha = math.sqrt(2.0 * L / (n * q[idx])) / inflate
        zeta = inflate * math.sqrt(2.0 * q[idx] * L / n)
        theta[idx] = truncated_mean(sample, theta[idx - 1], alpha, kind)
        state.alpha_even.append(alpha)
        state.zeta_even.append(zeta)

    state.theta = theta[1:]
    state.q = q[1:]

    z_last_odd = pre.zeta_odd[k - 1]
    q_last_odd = q[2 * k - 1]
    v_hi = math.exp(z_last_odd) * q_last_odd
    v_lo = (
        math.exp(-z_last_odd) * q_last_odd
        - (1.0 + x[2 * k - 3]) ** 2 * state.zeta_even[-2] ** 2
    )
    mean_est = ConfidenceEstimate(
        point=theta[2 * k],
        half_width=state.zeta_even[-1],
        miss_probability=pre.total_miss,
        feasible=True,
        metadata={
            "method": "kurtosis-scheme",
            "k": k,
            "c": c,
            "kind": kind.value,
            "jitter": None if jitter is None else {
                "seed": jitter.seed, "algorithm_id": jitter.algorithm_id
            },
        },
    )
    return mean_est, (v_lo, v_hi), state


def zeta_bound(
    n: int, c: float, v: float, prior_delta: float, eps, x
) -> float:
    """Deterministic (non-observable) bound on the final half-width, for
    curve plotting: propagates
      zeta_2   <= exp[(1+x_2) zeta_1] sqrt(2 [v + prior_delta^2] (log(1/eps_2)+gamma_2)/n)
      zeta_2i  <= exp[(1+x_2i) zeta_{2i-1}]
                  sqrt(2 [v + (1+x_{2i-1})^2 zeta_{2i-2}^2] (log(1/eps_2i)+gamma_2i)/n).
    prior_delta bounds |m - theta_1|.
    """
    pre = kurtosis_prelude(n, c, eps, x)
    k = pre.k
    eps, x, gamma = pre.eps, pre.x, pre.gamma
    zbar = None
    for i in range(1, k + 1):
        idx = 2 * i
        L = math.log(1.0 / eps[idx - 1]) + gamma[idx - 1]
        if i == 1:
            s = v + prior_delta * prior_delta
        else:
            s = v + (1.0 + x[idx - 3]) ** 2 * zprev * zprev
        zbar = math.exp((1.0 + x[idx - 2]) * pre.zeta_odd[i - 1]) * math.sqrt(
            2.0 * s * L / n
        )
        zprev = zbar
    return zbar
