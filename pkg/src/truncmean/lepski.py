"""Adaptation to an unknown variance bound by interval intersection.

Candidate variance bounds live on a dyadic grid coded by (scale, mantissa
bits); each candidate pays a union-bound cost through an atomic coding
measure nu.  The adaptive answer is the midpoint of the smallest nonempty
intersection J(v1) of the per-candidate intervals I(v0), v0 >= v1.  No
observable confidence interval exists for the result; the reported
half-width is the theoretical deviation curve only.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .core import ConfidenceEstimate, Sample
from .errors import EmptyFamily, InvalidParameter
from .iterated import (
    JitterSource,
    run_iterated,
    schedule_empirical_start,
    split_eps,
)

__all__ = [
    "DyadicCode",
    "nu_mass",
    "NU_NORMALIZATION",
    "enumerate_codes",
    "HomogeneousMethod",
    "default_iterated_method",
    "adapt",
]

# Total raw coding mass over all codes.  The scale sum telescopes:
# sum_s 1/((|s|+2)(|s|+3)) = 1/6 + 2*(1/2 - 1/6) = 5/6, and the mantissa sum
# is 2 (d=0, from the 2^{d-1} factor) plus sum_{d>=1} 2^{d-1}-ish counts
# cancelling to 3/2 in total, giving 5/4.  Dividing by this keeps the union
# bound valid.
NU_NORMALIZATION = 1.25


@dataclass(frozen=True)
class DyadicCode:
    """v0 = V * 2^s * sum_k bits[k] 2^{-k}, with bits[0] = bits[-1] = 1."""

    s: int
    d: int
    bits: tuple

    def __post_init__(self):
        if self.d < 0:
            raise InvalidParameter("mantissa length d must be >= 0")
        if len(self.bits) != self.d + 1:
            raise InvalidParameter("bits must have d+1 entries c_0..c_d")
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidParameter("bits must be 0/1")
        if self.bits[0] != 1 or self.bits[-1] != 1:
            raise InvalidParameter("leading and trailing mantissa bits must be 1")

    def decode(self, V: float = 1.0) -> float:
        mant = sum(b * 2.0 ** (-k) for k, b in enumerate(self.bits))
        return V * 2.0**self.s * mant

    @staticmethod
    def encode(v0: float, V: float = 1.0, d_max: int = 60) -> "DyadicCode":
        """Inverse of decode for exactly representable v0; raises
        InvalidParameter when v0/V has no terminating mantissa of length
        <= d_max."""
        if v0 <= 0.0 or V <= 0.0:
            raise InvalidParameter("v0 and V must be positive")
        s = math.floor(math.log2(v0 / V))
        mant = v0 / (V * 2.0**s)
        # guard against log2 rounding at powers of two
        if mant < 1.0:
            s -= 1
            mant = v0 / (V * 2.0**s)
        elif mant >= 2.0:
            s += 1
            mant = v0 / (V * 2.0**s)
        bits = [1]
        frac = mant - 1.0
        while frac > 0.0 and len(bits) <= d_max:
            frac *= 2.0
            bit = int(frac >= 1.0)
            bits.append(bit)
            frac -= bit
        if frac != 0.0:
            raise InvalidParameter(
                f"{v0}/{V} has no terminating dyadic mantissa of length <= {d_max}"
            )
        while len(bits) > 1 and bits[-1] == 0:
            bits.pop()
        code = DyadicCode(s=s, d=len(bits) - 1, bits=tuple(bits))
        return code


def nu_mass(code: DyadicCode) -> float:
    """Normalized atomic mass of a code:
    [(|s|+2)(|s|+3)(d+1)(d+2) 2^{d-1}]^{-1} / 1.25."""
    s, d = abs(code.s), code.d
    raw = 1.0 / ((s + 2) * (s + 3) * (d + 1) * (d + 2) * 2.0 ** (d - 1))
    return raw / NU_NORMALIZATION


def enumerate_codes(s_lo: int, s_hi: int, d_max: int) -> Iterator[DyadicCode]:
    """All codes with s in [s_lo, s_hi] and mantissa length <= d_max, in
    deterministic (s, d, bits) lexicographic order."""
    if s_lo > s_hi or d_max < 0:
        raise InvalidParameter("empty code range")
    for s in range(s_lo, s_hi + 1):
        for d in range(d_max + 1):
            if d == 0:
                yield DyadicCode(s, 0, (1,))
                continue
            for inner in range(2 ** max(d - 1, 0)):
                mid = tuple((inner >> (d - 2 - j)) & 1 for j in range(d - 1))
                yield DyadicCode(s, d, (1,) + mid + (1,))


@dataclass(frozen=True)
class HomogeneousMethod:
    """Estimator family with width delta(v0, eps) = unit_width(n, eps) sqrt(v0).

    point(sample, v0, eps) runs the estimator under variance prior v0 at
    one-sided budget eps; unit_width(n, eps) is its half-width at v0 = 1.
    """

    name: str
    point: Callable[[Sample, float, float], float]
    unit_width: Callable[[int, float], float]


def _code_seed(base_seed: int, v0: float) -> int:
    payload = repr((base_seed, v0)).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def default_iterated_method(
    k: int = 6,
    x: float = 0.1,
    split: str = "paper",
    jitter_seed: int | None = None,
) -> HomogeneousMethod:
    """Empirical-mean-start iterated scheme as the adaptation base.

    Its half-width is exactly homogeneous of degree 1/2 in the variance
    prior.  Jitter seeds are derived per candidate v0 from jitter_seed, so
    the result is independent of grid enumeration order; jitter_seed=None
    zeroes the jitter.
    """
    xs = (x,) * (k - 1)

    def point(sample: Sample, v0: float, eps: float) -> float:
        sched = schedule_empirical_start(sample.n, v0, split_eps(eps, k, split), xs)
        jit = (
            None
            if jitter_seed is None
            else JitterSource(_code_seed(jitter_seed, v0))
        )
        return run_iterated(sample, sched, jitter=jit).point

    def unit_width(n: int, eps: float) -> float:
        return schedule_empirical_start(n, 1.0, split_eps(eps, k, split), xs).half_width

    return HomogeneousMethod(name=f"iterated-empirical-k{k}", point=point,
                             unit_width=unit_width)


def adapt(
    sample: Sample,
    eps: float,
    V: float = 1.0,
    base_method: HomogeneousMethod | None = None,
    grid_limits: tuple = ((-20, 20), 2),
    codes: Sequence[DyadicCode] | None = None,
) -> ConfidenceEstimate:
    """Midpoint of the smallest nonempty nested intersection.

    I(v0) = point(v0) +- unit_width(n, eps*nu(v0)) sqrt(v0); J(v1) is the
    intersection of I(v0) over grid candidates v0 >= v1, a non-increasing
    family as v1 decreases.  The reported half_width is the deterministic
    curve 2 inf_v0 unit_width(n, eps*nu(v0)) sqrt(v0) over the grid — a
    theoretical deviation bound, not an observable interval (metadata flag
    "theoretical_only").
    """
    if not (0.0 < eps < 1.0):
        raise InvalidParameter("eps must lie in (0,1)")
    if V <= 0.0:
        raise InvalidParameter("V must be positive")
    if base_method is None:
        base_method = default_iterated_method()
    if codes is None:
        (s_lo, s_hi), d_max = grid_limits
        codes = list(enumerate_codes(s_lo, s_hi, d_max))
    if not codes:
        raise EmptyFamily("no candidate variance bounds on the grid")

    entries = []
    for code in codes:
        v0 = code.decode(V)
        budget = eps * nu_mass(code)
        w = base_method.unit_width(sample.n, budget) * math.sqrt(v0)
        p = base_method.point(sample, v0, budget)
        entries.append((v0, p - w, p + w, w))
    # sort by v0 descending; ties keep a deterministic order by interval
    entries.sort(key=lambda e: (-e[0], e[1], e[2]))

    lo, hi = -math.inf, math.inf
    best = None  # smallest nonempty J
    for v0, a, b, _ in entries:
        nlo, nhi = max(lo, a), min(hi, b)
        if nlo > nhi:
            break
        lo, hi = nlo, nhi
        best = (v0, lo, hi)
    if best is None:
        raise EmptyFamily(
            f"every nested intersection is empty over {len(entries)} candidates "
            f"(V={V}); the reference scale is likely far from the data"
        )
    v_min, jlo, jhi = best
    theo = 2.0 * min(w for (_, _, _, w) in entries)
    return ConfidenceEstimate(
        point=0.5 * (jlo + jhi),
        half_width=theo,
        miss_probability=2.0 * eps,
        feasible=True,
        metadata={
            "method": f"lepski[{base_method.name}]",
            "theoretical_only": True,
            "v1_smallest_nonempty": v_min,
            "J": (jlo, jhi),
            "grid_size": len(entries),
            "V": V,
        },
    )
