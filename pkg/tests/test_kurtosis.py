import math

import numpy as np
import pytest
from scipy import optimize

from truncmean.core import Sample
from truncmean.errors import (
    AdmissibilityError,
    DomainError,
    InvalidParameter,
    NoRoot,
)
from truncmean.iterated import JitterSource
from truncmean.kurtosis import (
    admissibility_bound,
    c_symmetric,
    kappa_c_bounds,
    kurtosis_prelude,
    q_eval,
    q_inverse,
    run_kurtosis_scheme,
    zeta_bound,
)


class TestKurtosisAlgebra:
    def test_bounds_examples(self):
        lo, hi = kappa_c_bounds(3.0)
        assert lo == 3.0
        assert hi == pytest.approx(3.0 + 4.0 * math.sqrt(18.0) / 9.0, abs=1e-12)
        assert hi <= 5.0
        lo1, hi1 = kappa_c_bounds(1.0)
        assert (lo1, hi1) == (1.0, pytest.approx(25.0 / 9.0, abs=1e-12))
        with pytest.raises(DomainError):
            kappa_c_bounds(0.5)

    def test_upper_never_exceeds_kappa_plus_two(self):
        for k in np.linspace(1.0, 50.0, 100):
            _, hi = kappa_c_bounds(float(k))
            assert k <= hi <= k + 2.0 + 1e-12

    def test_c_symmetric_branches(self):
        assert c_symmetric(3.0) == 3.0
        assert c_symmetric(7.2) == 7.2
        assert c_symmetric(1.0) == pytest.approx(2.0, abs=1e-14)
        assert c_symmetric(2.0) == pytest.approx(2.0 + 1.0 / 3.0, abs=1e-14)

    @pytest.mark.parametrize("kappa", np.linspace(1.0, 3.0, 25))
    def test_c_symmetric_matches_numeric_maximization(self, kappa):
        # independent oracle: maximize kappa (1-y)^2 + 6 y (1-y) + y^2 on (0,1)
        obj = lambda y: -(kappa * (1 - y) ** 2 + 6 * y * (1 - y) + y * y)
        res = optimize.minimize_scalar(obj, bounds=(0.0, 1.0), method="bounded",
                                       options={"xatol": 1e-12})
        assert c_symmetric(float(kappa)) == pytest.approx(-res.fun, abs=1e-9)

    def test_bernoulli_gap_tends_to_two(self):
        # closed forms: kappa = 1/p - 2 + p/(1-p); c >= 1/p
        gaps = []
        for p in (1e-2, 1e-4, 1e-6):
            kappa = 1.0 / p - 2.0 + p / (1.0 - p)
            gaps.append(1.0 / p - kappa)
        assert gaps[-1] == pytest.approx(2.0, abs=1e-5)
        assert all(abs(g - 2.0) >= abs(h - 2.0) for g, h in zip(gaps, gaps[1:]))


class TestQCriterion:
    def test_q_at_zero(self):
        rng = np.random.default_rng(0)
        s = Sample(rng.normal(size=30))
        delta = 0.3
        assert q_eval(s, 0.1, delta, 0.0) == pytest.approx(
            math.log(1.0 - delta + delta * delta / 2.0), abs=1e-14
        )
        assert q_eval(s, 0.1, delta, 0.0) < 0.0

    def test_constant_sample_flat(self):
        s = Sample([2.0] * 10)
        for a in (0.0, 1.0, 100.0):
            assert q_eval(s, 2.0, 0.2, a) == pytest.approx(
                math.log(1.0 - 0.2 + 0.02), abs=1e-14
            )
        with pytest.raises(NoRoot):
            q_inverse(s, 2.0, 0.2, 0.0)

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(1)
        for trial in range(20):
            s = Sample(rng.standard_t(5, size=50))
            theta = rng.normal()
            delta = rng.uniform(0.05, 0.9)
            alphas = np.linspace(0.0, 3.0, 40)
            vals = [q_eval(s, theta, delta, float(a)) for a in alphas]
            assert all(b - a >= -1e-10 for a, b in zip(vals, vals[1:]))

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        s = Sample(rng.normal(size=100))
        delta = 0.2
        for alpha0 in (0.05, 0.3, 1.7):
            target = q_eval(s, 0.0, delta, alpha0)
            back = q_inverse(s, 0.0, delta, target)
            assert back == pytest.approx(alpha0, abs=1e-8)
            assert abs(q_eval(s, 0.0, delta, back) - target) <= 1e-10

    def test_scheme_target_above_q0(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = Sample(rng.normal(size=60))
            c = rng.uniform(1.5, 10.0)
            delta = rng.uniform(0.01, 0.1)
            assert -(c - 1.0) * delta * delta > q_eval(s, 0.0, delta, 0.0)

    def test_input_validation(self):
        s = Sample([1.0, 2.0])
        with pytest.raises(InvalidParameter):
            q_eval(s, 0.0, 1.5, 0.1)
        with pytest.raises(InvalidParameter):
            q_eval(s, 0.0, 0.5, -0.1)
        with pytest.raises(NoRoot):
            q_inverse(s, 0.0, 0.5, -10.0)  # below Q(0)


def reference_prelude(n, c, eps, x):
    """Independent reimplementation of the deterministic constants."""
    k = len(eps) // 2
    gam = [0.0]
    for i in range(2, 2 * k + 1):
        gam.append(gam[-1] + math.log(1.0 + 1.0 / x[i - 2]))
    deltas, zetas = [], []
    for i in range(1, k + 1):
        idx = 2 * i - 1
        d = math.sqrt(2.0 * (math.log(1.0 / eps[idx - 1]) + gam[idx - 1])
                      / ((c - 1.0) * n))
        a = c / (c - 1.0)
        y = (c - 1.0) * d
        h = 4.0 * y / ((1.0 + y) * (1.0 + math.sqrt(1.0 - 4.0 * a * y * y
                                                    / (1.0 + y) ** 2)))
        deltas.append(d)
        zetas.append(-0.5 * math.log(1.0 - h))
    return gam, deltas, zetas


class TestScheme:
    def setup_method(self):
        self.k = 3
        self.x = (0.5,) * (2 * self.k - 2) + (0.1,)
        self.eps = (1e-3,) * (2 * self.k)

    def test_prelude_matches_reference(self):
        # the plotted configuration: x_i = 0.5 below the last step, 0.1 there
        pre = kurtosis_prelude(2000, 3.0, self.eps, self.x)
        gam, deltas, zetas = reference_prelude(2000, 3.0, self.eps, self.x)
        assert np.allclose(pre.gamma, gam, atol=1e-12)
        assert np.allclose(pre.delta_odd, deltas, atol=1e-12)
        assert np.allclose(pre.zeta_odd, zetas, atol=1e-12)

    def test_admissibility(self):
        b = admissibility_bound(3.0)
        assert b == pytest.approx(1.0 / (2.0 * math.sqrt(6.0) - 2.0), abs=1e-14)
        with pytest.raises(AdmissibilityError):
            kurtosis_prelude(10, 3.0, (1e-8,) * 4, (0.5, 0.5, 0.1))

    def test_prelude_sample_free(self):
        p1 = kurtosis_prelude(2000, 3.0, self.eps, self.x)
        p2 = kurtosis_prelude(2000, 3.0, self.eps, self.x)
        assert p1 == p2

    def test_run_deterministic(self):
        rng = np.random.default_rng(4)
        s = Sample(rng.normal(size=2000))
        a = run_kurtosis_scheme(s, 0.0, 3.0, self.eps, self.x, JitterSource(9))
        b = run_kurtosis_scheme(s, 0.0, 3.0, self.eps, self.x, JitterSource(9))
        assert a[0].point == b[0].point
        assert a[1] == b[1]
        assert a[2].theta == b[2].theta
        assert a[2].q == b[2].q

    def test_scale_equivariance(self):
        rng = np.random.default_rng(5)
        vals = rng.standard_t(6, size=1500)
        scale = 3.7
        a = run_kurtosis_scheme(Sample(vals), 0.0, 4.0, self.eps, self.x,
                                JitterSource(2))
        b = run_kurtosis_scheme(Sample(scale * vals), 0.0, 4.0, self.eps,
                                self.x, JitterSource(2))
        assert b[0].point == pytest.approx(scale * a[0].point, rel=1e-10, abs=1e-10)
        for qa, qb in zip(a[2].q, b[2].q):
            assert qb == pytest.approx(scale * scale * qa, rel=1e-10)

    def test_variance_interval_on_gaussian(self):
        hits = 0
        for i in range(40):
            rng = np.random.default_rng(100 + i)
            s = Sample(rng.normal(size=2000))
            _, (lo, hi), _ = run_kurtosis_scheme(s, 0.0, 3.0, self.eps, self.x,
                                                 JitterSource(i))
            hits += lo <= 1.0 <= hi
        assert hits >= 38

    def test_needs_even_eps_and_k_at_least_two(self):
        with pytest.raises(InvalidParameter):
            kurtosis_prelude(100, 3.0, (0.1, 0.1, 0.1), (0.5, 0.5))
        s = Sample(np.random.default_rng(0).normal(size=100))
        with pytest.raises(InvalidParameter):
            run_kurtosis_scheme(s, 0.0, 3.0, (0.01, 0.01), (0.5,))


def test_zeta_bound_positive_and_monotone_in_eps():
    x = (0.5, 0.5, 0.5, 0.5, 0.1)
    # more stringent budgets give wider deterministic bounds
    w1 = zeta_bound(2000, 3.0, 1.0, 1.0, (1e-2,) * 6, x)
    w2 = zeta_bound(2000, 3.0, 1.0, 1.0, (1e-4,) * 6, x)
    assert 0.0 < w1 < w2
