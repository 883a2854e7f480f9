"""Single-level closed forms against the variational oracle."""

import math

import numpy as np
import pytest

from remlab.analytic_rem import (
    annealed_compact,
    build_rem_curve,
    rate_for_model,
    rem_binomial,
    rem_exponential,
    rem_gaussian,
    rem_poisson,
    rem_truncated,
    rem_variational,
    rem_weibull,
    weibull_threshold,
)
from remlab.rates import (
    LOG2,
    BinomialRate,
    GaussianRate,
    NegatedRate,
    PiecewiseHalfRate,
    PoissonRate,
    PowerGammaRate,
    RateFunction,
    TwoSidedExponentialRate,
)


class TestVariational:
    def test_zero_beta_is_log2(self):
        assert rem_variational(GaussianRate(), "identity", 0.0) == pytest.approx(
            LOG2, abs=1e-12)

    def test_gaussian_beta_one(self):
        assert rem_variational(GaussianRate(), "identity", 1.0) == pytest.approx(
            LOG2 + 0.5, abs=1e-9)

    def test_exponential_frozen_branch(self):
        assert rem_variational(TwoSidedExponentialRate(), "identity", 2.0) == \
            pytest.approx(2.0 * LOG2, abs=1e-9)


class TestGaussian:
    def test_values(self):
        assert rem_gaussian(0.0) == pytest.approx(0.693147, abs=5e-7)
        assert rem_gaussian(1.0) == pytest.approx(1.193147, abs=5e-7)
        # exact value 2*sqrt(2 log 2) = 2.3548200450...
        assert rem_gaussian(2.0) == pytest.approx(2.0 * math.sqrt(2 * LOG2), abs=1e-15)
        assert rem_gaussian(2.0) == pytest.approx(2.354821, abs=2e-6)


class TestWeibull:
    def test_gamma3(self):
        assert rem_weibull(3.0, 1.0) == pytest.approx(1.359814, abs=5e-7)

    def test_gamma1_plateau(self):
        assert rem_weibull(1.0, 0.5) == pytest.approx(LOG2, abs=1e-12)

    def test_gamma1_equals_exponential(self):
        for b in np.linspace(0, 3, 13):
            assert rem_weibull(1.0, b) == pytest.approx(rem_exponential(b), abs=1e-12)

    def test_gamma2_equals_gaussian(self):
        for b in np.linspace(0, 3, 13):
            assert rem_weibull(2.0, b) == pytest.approx(rem_gaussian(b), abs=1e-12)

    def test_small_gamma_threshold(self):
        # plateau exactly until gamma^(-1/gamma) (log 2)^(-(1-gamma)/gamma)
        g = 0.5
        bc = g ** (-1.0 / g) * LOG2 ** (-(1.0 - g) / g)
        assert weibull_threshold(g) == pytest.approx(bc, abs=1e-14)
        rate = PowerGammaRate(g)
        for b in (0.5 * bc, 0.98 * bc):
            assert rem_weibull(g, b) == pytest.approx(LOG2, abs=1e-12)
            assert rem_variational(rate, "identity", b) == pytest.approx(LOG2, abs=1e-8)
        for b in (1.02 * bc, 2.0 * bc):
            closed = rem_weibull(g, b)
            assert closed > LOG2 + 1e-6
            assert rem_variational(rate, "identity", b) == pytest.approx(closed, abs=1e-8)

    def test_gamma3_threshold_continuity(self):
        # the freezing point is (gamma log2)^((gamma-1)/gamma); both branch
        # formulas agree there, and the oracle confirms the location
        g = 3.0
        bc = weibull_threshold(g)
        left = LOG2 + (g - 1) / g * bc ** (g / (g - 1))
        right = bc * (g * LOG2) ** (1.0 / g)
        assert left == pytest.approx(right, abs=1e-12)
        for b in (0.9 * bc, bc, 1.1 * bc):
            assert rem_weibull(g, b) == pytest.approx(
                rem_variational(PowerGammaRate(g), "identity", b), abs=1e-8)


class TestPoisson:
    def test_small_theta(self):
        assert rem_poisson(0.5, 1, 1.0) == pytest.approx(0.377087, abs=5e-7)
        assert rem_poisson(0.5, 1, 0.0) == pytest.approx(LOG2, abs=1e-12)

    def test_large_theta_matches_oracle(self):
        value = rem_poisson(1.0, 1, 3.0)
        oracle = rem_variational(PoissonRate(1.0), "identity", 3.0)
        assert value == pytest.approx(oracle, abs=1e-8)

    def test_negated(self):
        for theta in (0.3, 1.2):
            for b in (0.0, 0.5, 2.0):
                oracle = rem_variational(PoissonRate(theta), "negation", b)
                assert rem_poisson(theta, -1, b) == pytest.approx(oracle, abs=1e-8)


class TestBinomial:
    def test_half(self):
        assert rem_binomial(0.5, 1, 1.0) == pytest.approx(0.313262, abs=5e-7)

    def test_negated_at_zero(self):
        assert rem_binomial(0.3, -1, 0.0) == pytest.approx(LOG2, abs=1e-12)

    def test_large_beta_slope(self):
        # slope -x1 with I(x1) = log 2
        from remlab.rates import _bisect

        rate = BinomialRate(0.7)
        x1 = _bisect(lambda x: float(rate.evaluate(x)) - LOG2, 1e-12, 0.7)
        e1 = rem_binomial(0.7, 1, 8.0)
        e2 = rem_binomial(0.7, 1, 9.0)
        assert e2 - e1 == pytest.approx(-x1, abs=1e-10)
        assert e1 == pytest.approx(rem_variational(rate, "identity", 8.0), abs=1e-8)


class TestCompactAndTruncated:
    def test_compact(self):
        assert annealed_compact(0.0, 5.0) == pytest.approx(LOG2, abs=1e-15)
        assert annealed_compact(1.0, 1.0) == pytest.approx(1.693147, abs=5e-7)
        assert annealed_compact(math.inf, 1.0) == math.inf
        assert annealed_compact(math.inf, 0.0) == pytest.approx(LOG2)

    def test_truncated(self):
        assert rem_truncated("exp", 1.0, 0.5) == pytest.approx(LOG2, abs=1e-12)
        assert rem_truncated("exp", 0.5, 2.0) == pytest.approx(1.193147, abs=5e-7)
        assert rem_truncated("gauss", 0.5, 2.0) == pytest.approx(2.193147, abs=5e-7)


class TestCurves:
    def test_gaussian_structure(self):
        curve = build_rem_curve("gaussian")
        assert curve.breakpoints == pytest.approx((1.177410,), abs=5e-7)
        assert [s.kind for s in curve.segments] == ["quadratic", "linear"]

    def test_exponential_structure(self):
        curve = build_rem_curve("exponential")
        assert curve.breakpoints == (1.0,)
        assert [s.kind for s in curve.segments] == ["constant", "linear"]

    def test_poisson_small_theta_structure(self):
        curve = build_rem_curve("poisson", theta=0.5)
        assert curve.breakpoints == ()
        assert [s.kind for s in curve.segments] == ["exp-decay"]

    def test_curves_match_scalar_ops(self):
        cases = [
            ("gaussian", {}, rem_gaussian),
            ("exponential", {}, rem_exponential),
            ("weibull", {"gamma": 2.7}, lambda b: rem_weibull(2.7, b)),
            ("weibull", {"gamma": 0.6}, lambda b: rem_weibull(0.6, b)),
            ("poisson", {"theta": 0.4}, lambda b: rem_poisson(0.4, 1, b)),
            ("poisson", {"theta": 1.1}, lambda b: rem_poisson(1.1, 1, b)),
            ("poisson", {"theta": 0.9, "sign": -1}, lambda b: rem_poisson(0.9, -1, b)),
            ("binomial", {"p": 0.35}, lambda b: rem_binomial(0.35, 1, b)),
            ("binomial", {"p": 0.72}, lambda b: rem_binomial(0.72, 1, b)),
            ("binomial", {"p": 0.28, "sign": -1}, lambda b: rem_binomial(0.28, -1, b)),
            ("compact", {"alpha": 0.7}, lambda b: annealed_compact(0.7, b)),
            ("truncated-exp", {"alpha": 0.4}, lambda b: rem_truncated("exp", 0.4, b)),
            ("truncated-gauss", {"alpha": 0.3}, lambda b: rem_truncated("gauss", 0.3, b)),
        ]
        grid = np.arange(0.0, 3.0 + 1e-9, 1e-3)
        for model, params, scalar in cases:
            curve = build_rem_curve(model, **params)
            values = curve(grid)
            expected = np.array([scalar(b) for b in grid])
            assert np.max(np.abs(values - expected)) < 1e-10, model

    def test_curve_invariants(self):
        rng = np.random.default_rng(3)
        models = [("gaussian", {}), ("exponential", {}),
                  ("weibull", {"gamma": float(rng.uniform(1.1, 4))}),
                  ("weibull", {"gamma": float(rng.uniform(0.3, 0.95))}),
                  ("poisson", {"theta": float(rng.uniform(0.1, 1.5))}),
                  ("binomial", {"p": float(rng.uniform(0.1, 0.9))}),
                  ("truncated-exp", {"alpha": 0.5}),
                  ("truncated-gauss", {"alpha": 0.4})]
        for model, params in models:
            curve = build_rem_curve(model, **params)
            assert float(curve(0.0)) == pytest.approx(LOG2, abs=1e-12), model
            assert curve.max_breakpoint_jump() < 1e-10, model
            assert curve.convexity_defect(3.0, 500) >= -1e-9, model


class TestOracleAgreement:
    def test_forty_random_instances(self):
        rng = np.random.default_rng(2024)
        betas = np.linspace(0.0, 3.0, 25)
        checks = 0
        while checks < 40:
            kind = checks % 5
            if kind == 0:
                scalar, rate, obj = rem_gaussian, GaussianRate(), "identity"
                closed = lambda b: rem_gaussian(b)
            elif kind == 1:
                g = float(rng.uniform(0.4, 3.5))
                rate, obj = PowerGammaRate(g), "identity"
                closed = lambda b, g=g: rem_weibull(g, b)
            elif kind == 2:
                t = float(rng.uniform(0.15, 1.4))
                rate, obj = PoissonRate(t), "identity"
                closed = lambda b, t=t: rem_poisson(t, 1, b)
            elif kind == 3:
                t = float(rng.uniform(0.15, 1.4))
                rate, obj = NegatedRate(PoissonRate(t)), "identity"
                closed = lambda b, t=t: rem_poisson(t, -1, b)
            else:
                p = float(rng.uniform(0.1, 0.9))
                sgn = 1 if rng.uniform() < 0.5 else -1
                rate = BinomialRate(p) if sgn == 1 else NegatedRate(BinomialRate(p))
                obj = "identity"
                closed = lambda b, p=p, s=sgn: rem_binomial(p, s, b)
            for b in betas:
                assert closed(float(b)) == pytest.approx(
                    rem_variational(rate, obj, float(b)), abs=1e-6)
            checks += 1

    def test_symmetry_irrelevance(self):
        # exponential left half glued to a Gaussian right half behaves
        # exactly like the pure exponential: only the negative side matters
        hybrid = PiecewiseHalfRate(TwoSidedExponentialRate(), GaussianRate())
        pure = TwoSidedExponentialRate()
        for b in np.linspace(0.0, 3.0, 16):
            assert rem_variational(hybrid, "identity", float(b)) == pytest.approx(
                rem_variational(pure, "identity", float(b)), abs=1e-9)

    def test_rate_specific_not_distribution_specific(self):
        for b in np.linspace(0.0, 3.0, 16):
            assert rem_variational(PowerGammaRate(2.0), "identity", float(b)) == \
                pytest.approx(rem_variational(GaussianRate(), "identity", float(b)),
                              abs=1e-9)

    def test_nonnegative_support_never_freezes(self):
        class HalfPower(RateFunction):
            family = "half-power"

            def evaluate(self, x):
                x = np.asarray(x, dtype=float)
                out = np.where(x >= 0, np.abs(x) ** 1.5, np.inf)
                return out if out.shape else float(out)

            def domain(self):
                return (0.0, math.inf)

            def zero_interval(self):
                return (0.0, 0.0)

        rate = HalfPower()
        for b in (0.0, 0.5, 2.0, 10.0):
            assert rem_variational(rate, "identity", b) == pytest.approx(LOG2, abs=1e-9)


class TestRateForModel:
    def test_matches_curves(self):
        # driving rates reproduce the curve through the oracle
        cases = [("gaussian", {}), ("exponential", {}),
                 ("weibull", {"gamma": 1.8}),
                 ("poisson", {"theta": 0.5}),
                 ("binomial", {"p": 0.6}),
                 ("truncated-gauss", {"alpha": 0.3})]
        for model, params in cases:
            rate = rate_for_model(model, **params)
            curve = build_rem_curve(model, **params)
            for b in (0.0, 0.4, 1.1, 2.3):
                assert rem_variational(rate, "identity", b) == pytest.approx(
                    float(curve(b)), abs=1e-7), model
