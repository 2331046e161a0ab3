import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from truncmean.errors import DomainError
from truncmean.scalar_funcs import (
    CLIP_A,
    CLIP_LAMBDA,
    T_SUP,
    g_gap,
    h_ancillary,
    l_clipped,
    l_envelopes,
    log_quad_envelope_check,
    normal_cdf,
    normal_quantile,
    phi,
    t_envelopes,
    t_smooth,
)

finite_x = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def test_t_smooth_at_zero_and_maximum():
    assert t_smooth(0.0) == 0.0
    # the maximum sits at sqrt(2): T'(x) = (4 - 2x^2)/(4 + x^4)
    assert t_smooth(math.sqrt(2.0)) == pytest.approx(math.log(1.0 + math.sqrt(2.0)), abs=1e-14)
    assert t_smooth(math.sqrt(2.0)) == pytest.approx(0.881374, abs=1e-6)


@given(finite_x)
def test_t_smooth_is_odd(x):
    assert t_smooth(-x) == pytest.approx(-t_smooth(x), abs=1e-12)


def test_t_smooth_bounded_and_monotone_in_core():
    x = np.linspace(-50, 50, 5001)
    assert np.all(np.abs(t_smooth(x)) <= T_SUP + 1e-12)
    core = np.linspace(-math.sqrt(2), math.sqrt(2), 500)
    vals = t_smooth(core)
    assert np.all(np.diff(vals) > 0)


def test_t_envelope_values_at_one():
    lo, hi = t_envelopes(1.0)
    assert lo == pytest.approx(-math.log(0.5), abs=1e-12)
    assert hi == pytest.approx(math.log(2.5), abs=1e-12)


def test_t_envelopes_bracket_everywhere():
    rng = np.random.default_rng(0)
    x = np.concatenate([np.linspace(-10, 10, 2001), rng.uniform(-10, 10, 5000)])
    lo, hi = t_envelopes(x)
    t = t_smooth(x)
    assert np.all(lo <= t + 1e-12)
    assert np.all(t <= hi + 1e-12)


def test_log_quad_envelope_residuals():
    lo, hi = log_quad_envelope_check(0.0)
    assert lo == 0.0 and hi == 0.0
    r1 = math.log(2.5) - 1.0 + 1.0 / 6.0
    assert r1 == pytest.approx(0.082957, abs=1e-6)
    lo1, hi1 = log_quad_envelope_check(1.0)
    assert lo1 > 0.0 and hi1 > 0.0
    rng = np.random.default_rng(1)
    x = np.concatenate([np.linspace(-20, 20, 4001), rng.uniform(-20, 20, 10000)])
    lo, hi = log_quad_envelope_check(x)
    assert np.min(lo) >= -1e-12
    assert np.min(hi) >= -1e-12


def test_g_gap_value_and_bounds():
    assert g_gap(0.0) == 0.0
    assert g_gap(1.0) == pytest.approx(1.0 - 0.5 * math.log(5.0), abs=1e-12)
    rng = np.random.default_rng(2)
    x = np.concatenate([np.linspace(-50, 50, 5001), rng.uniform(-50, 50, 10000)])
    g = np.abs(g_gap(x))
    cap = np.minimum(np.abs(x) ** 3 / 5.0, np.minimum(0.3 * x**2, np.abs(x)))
    assert np.all(g <= cap + 1e-12)


def test_phi_branches():
    assert phi(0.0) == 0.0
    assert phi(0.25) == pytest.approx(0.5, abs=1e-14)
    assert math.isinf(phi(0.3))
    x = np.linspace(1e-6, 0.25 - 1e-9, 1000)
    assert np.all(phi(x) <= x / (1.0 - 2.0 * x) + 1e-12)


def test_h_ancillary_domain():
    assert h_ancillary(2.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        h_ancillary(10.0, 5.0)  # 4*10*25 > 36
    ys = np.linspace(0.0, 0.4, 50)
    vals = [h_ancillary(1.5, float(y)) for y in ys]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_h_reproduces_quadratic_root():
    # with a = c/(c-1), y = (c-1)*delta, the value -delta*h(a, y) solves
    # c z^2/2 + ((c-1) delta + 1) z + 2 (c-1) delta^2 = 0
    c, delta = 3.0, 0.05
    z = -delta * h_ancillary(c / (c - 1.0), (c - 1.0) * delta)
    resid = 0.5 * c * z * z + ((c - 1.0) * delta + 1.0) * z + 2.0 * (c - 1.0) * delta**2
    assert resid == pytest.approx(0.0, abs=1e-12)


def test_clip_and_envelopes():
    assert l_clipped(0.5) == 0.5
    assert l_clipped(3.0) == 1.0
    assert l_clipped(-2.0) == -1.0
    rng = np.random.default_rng(3)
    x = np.concatenate([np.linspace(-10, 10, 2001), rng.uniform(-10, 10, 5000)])
    lo, hi = l_envelopes(x)
    v = l_clipped(x)
    assert np.all(lo <= v + 1e-12)
    assert np.all(v <= hi + 1e-12)


def test_clip_lambda_root():
    assert 0.535 <= CLIP_LAMBDA <= 0.536
    lam = CLIP_LAMBDA
    val = -math.log(1.0 - lam * lam / (4.0 * (math.expm1(lam) - lam))) / lam
    assert val == pytest.approx(1.0, abs=1e-12)
    assert math.sqrt(CLIP_A) <= 1.1


def test_normal_quantile_examples():
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    with pytest.raises(DomainError):
        normal_quantile(0.0)
    with pytest.raises(DomainError):
        normal_quantile(1.0)


@pytest.mark.parametrize("p", [1e-15, 1e-8, 0.01, 0.5, 0.99, 1 - 1e-12])
def test_normal_quantile_round_trip(p):
    z = normal_quantile(p)
    assert abs(normal_cdf(z) - p) <= 1e-10
    # odd symmetry; skip extreme p where 1-p itself rounds away the input
    if p != 0.5 and 1e-4 <= p <= 1.0 - 1e-4:
        assert normal_quantile(1.0 - p) == pytest.approx(-z, abs=1e-10)


def test_normal_cdf_against_independent_erf():
    # stdlib math.erf as the independent reference
    for z in np.linspace(-6, 6, 121):
        ref = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        assert normal_cdf(float(z)) == pytest.approx(ref, abs=1e-13)
