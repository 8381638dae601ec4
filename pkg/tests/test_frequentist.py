import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iglfr import distribution as d
from iglfr.datasets import builtin
from iglfr.distribution import Params
from iglfr.errors import DataError
from iglfr.frequentist import (
    FitResult, ObservedSample, asymptotic_cis, fit_mle, fit_mps, hessian, log_likelihood,
    log_spacings, mps_gradient, mps_objective, observed_information, score,
)

TRUTH = Params(0.5, 0.5, 1.0)
FLOOD = builtin("flood").values
COVID = builtin("covid").values


def _fd_grad(f, v, rel=1e-6):
    v = np.asarray(v, dtype=float)
    g = np.zeros(3)
    for j in range(3):
        h = rel * abs(v[j])
        hi, lo = v.copy(), v.copy()
        hi[j] += h
        lo[j] -= h
        g[j] = (f(Params(*hi)) - f(Params(*lo))) / (2 * h)
    return g


def _random_case(rng, n=40):
    a, b = np.exp(rng.uniform(np.log(0.2), np.log(3), 2))
    t = np.exp(rng.uniform(np.log(0.3), np.log(5)))
    p = Params(a, b, t)
    s = d.sample(p, n, rng)
    # evaluate away from the generating point
    q = Params(*(p.as_array() * rng.uniform(0.7, 1.3, 3)))
    return q, ObservedSample(s)


class TestObservedSample:
    def test_sorted_view(self):
        s = ObservedSample([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(s.sorted_view, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(s.values, [3.0, 1.0, 2.0])

    @pytest.mark.parametrize("bad", [[], [1.0, -2.0], [1.0, 0.0], [1.0, np.nan], [np.inf]])
    def test_rejects(self, bad):
        with pytest.raises(DataError):
            ObservedSample(bad)

    def test_fit_needs_four(self):
        with pytest.raises(DataError):
            fit_mle([1.0, 2.0, 3.0])


class TestLikelihood:
    def test_sum_of_log_pdf(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            p, s = _random_case(rng)
            assert log_likelihood(p, s) == pytest.approx(np.sum(d.log_pdf(p, s.values)), abs=1e-10)

    def test_single_observation(self):
        assert log_likelihood(Params(1, 0, 1), [1.0]) == pytest.approx(-1.0, abs=1e-14)

    def test_theta_score_closed_form(self):
        rng = np.random.default_rng(2)
        p, s = _random_case(rng)
        expected = len(s) / p.theta + np.sum(d.log_gamma_term(p, s.values))
        assert score(p, s)[2] == pytest.approx(expected, rel=1e-14)

    def test_score_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(50):
            p, s = _random_case(rng)
            num = _fd_grad(lambda q: log_likelihood(q, s), p.as_array())
            an = score(p, s)
            worst = max(worst, np.max(np.abs(an - num) / np.maximum(np.abs(num), 1.0)))
        assert worst < 1e-6

    def test_hessian_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(30):
            p, s = _random_case(rng)
            v = p.as_array()
            num = np.zeros((3, 3))
            for j in range(3):
                h = 1e-6 * v[j]
                hi, lo = v.copy(), v.copy()
                hi[j] += h
                lo[j] -= h
                num[:, j] = (score(Params(*hi), s) - score(Params(*lo), s)) / (2 * h)
            an = hessian(p, s)
            worst = max(worst, np.max(np.abs(an - num)) / np.max(np.abs(num)))
        assert worst < 1e-5

    def test_information_theta_entry_and_symmetry(self):
        rng = np.random.default_rng(5)
        p, s = _random_case(rng)
        info = observed_information(p, s)
        assert info[2, 2] == pytest.approx(len(s) / p.theta**2, rel=1e-15)
        np.testing.assert_array_equal(info, info.T)

    def test_information_at_flood_fit(self):
        fit = fit_mle(FLOOD)
        v = fit.params.as_array()
        num = np.zeros((3, 3))
        for j in (0, 2):
            h = 1e-6 * v[j]
            hi, lo = v.copy(), v.copy()
            hi[j] += h
            lo[j] -= h
            num[:, j] = (score(Params(*hi), FLOOD) - score(Params(*lo), FLOOD)) / (2 * h)
        free = np.ix_([0, 2], [0, 2])
        np.testing.assert_allclose(-fit.observed_info[free], num[free], rtol=1e-5)


class TestSpacings:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 2**32 - 1))
    def test_sum_to_one(self, n, seed):
        rng = np.random.default_rng(seed)
        p, _ = _random_case(rng, 5)
        s = d.sample(p, n, rng)
        assert math.fsum(np.exp(log_spacings(p, s))) == pytest.approx(1.0, abs=1e-12)

    def test_single_observation_form(self):
        p = Params(0.5, 0.5, 1.0)
        x = 1.3
        F = d.cdf(p, x)
        assert mps_objective(p, [x]) == pytest.approx(0.5 * (math.log(F) + math.log1p(-F)), rel=1e-13)

    def test_single_observation_optimum_at_median(self):
        # over theta alone, g* peaks where F(x) = 1/2
        x = 1.3
        thetas = np.linspace(0.2, 5, 4001)
        vals = [mps_objective(Params(0.5, 0.5, t), [x]) for t in thetas]
        best = thetas[int(np.argmax(vals))]
        assert d.cdf(Params(0.5, 0.5, best), x) == pytest.approx(0.5, abs=1e-3)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(50):
            p, s = _random_case(rng)
            # g* averages n + 1 logs, so tiny steps drown in roundoff; extrapolate instead
            f = lambda q: mps_objective(q, s)  # noqa: E731
            g1, g2 = _fd_grad(f, p.as_array(), 1e-4), _fd_grad(f, p.as_array(), 5e-5)
            num = (4 * g2 - g1) / 3
            worst = max(worst, np.max(np.abs(mps_gradient(p, s) - num)))
        assert worst < 1e-6

    def test_ties_use_log_density(self):
        s = np.array([0.5, 1.0, 1.0, 2.0, 3.0])
        ld = log_spacings(TRUTH, s)
        assert np.all(np.isfinite(ld))
        assert ld[2] == pytest.approx(d.log_pdf(TRUTH, 1.0), rel=1e-14)

    def test_fit_with_duplicates(self):
        s = np.concatenate([d.sample(TRUTH, 40, 11), [0.8, 0.8, 0.8]])
        fit = fit_mps(s)
        assert fit.converged and math.isfinite(fit.objective)


class TestFits:
    @pytest.mark.parametrize("fitter", [fit_mle, fit_mps])
    def test_consistency_large_n(self, fitter):
        s = d.sample(TRUTH, 5000, np.random.default_rng(0))
        fit = fitter(s)
        assert fit.converged
        np.testing.assert_allclose(fit.params.as_array(), TRUTH.as_array(), rtol=0.05)

    @pytest.mark.parametrize("fitter", [fit_mle, fit_mps])
    def test_within_three_standard_errors(self, fitter):
        for seed in range(6):
            fit = fitter(d.sample(TRUTH, 5000, np.random.default_rng(seed)))
            z = (fit.params.as_array() - TRUTH.as_array()) / fit.std_errors
            assert np.all(np.abs(z) < 3), (seed, z)

    def test_mle_matches_restart_search(self):
        from scipy.optimize import minimize
        s = d.sample(TRUTH, 300, np.random.default_rng(8))
        fit = fit_mle(s)
        best = -np.inf
        rng = np.random.default_rng(9)
        for _ in range(8):
            u0 = np.log(TRUTH.as_array()) + rng.normal(0, 0.5, 3)
            r = minimize(lambda u: -log_likelihood(Params(*np.exp(u)), s), u0, method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
            best = max(best, -r.fun)
        assert fit.objective >= best - 1e-6

    def test_result_invariants(self):
        fit = fit_mle(COVID)
        assert isinstance(fit, FitResult) and fit.method == "MLE"
        assert fit.converged and fit.gradient_norm < 1e-8
        np.testing.assert_allclose(fit.covariance, fit.covariance.T, atol=0)
        np.testing.assert_allclose(fit.std_errors, np.sqrt(np.diag(fit.covariance)))
        np.testing.assert_allclose(fit.covariance @ fit.observed_info, np.eye(3), atol=1e-8)

    def test_score_vanishes_at_interior_mle(self):
        for s in (COVID, d.sample(TRUTH, 200, 3)):
            fit = fit_mle(s)
            assert not fit.fixed
            assert np.max(np.abs(score(fit.params, s))) < 1e-6 * len(s)

    def test_likelihood_dominance(self):
        s = d.sample(TRUTH, 200, 4)
        fit = fit_mle(s)
        rng = np.random.default_rng(12)
        v = fit.params.as_array()
        for _ in range(1000):
            q = Params(*(v * rng.uniform(0.8, 1.2, 3)))
            assert log_likelihood(q, s) <= fit.objective + 1e-9

    @pytest.mark.parametrize("fitter", [fit_mle, fit_mps])
    def test_permutation_invariance(self, fitter):
        s = d.sample(TRUTH, 80, 5)
        a = fitter(s)
        b = fitter(np.random.default_rng(1).permutation(s))
        np.testing.assert_array_equal(a.params.as_array(), b.params.as_array())

    @pytest.mark.parametrize("fitter", [fit_mle, fit_mps])
    def test_scale_relation(self, fitter):
        s = d.sample(TRUTH, 150, 6)
        c = 7.0
        a = fitter(s).params
        b = fitter(c * s).params
        assert b.alpha == pytest.approx(c * a.alpha, rel=1e-3)
        assert b.beta == pytest.approx(c * c * a.beta, rel=1e-3)
        assert b.theta == pytest.approx(a.theta, rel=1e-3)

    def test_boundary_fit_pins_coordinate(self):
        fit = fit_mle(FLOOD)
        assert fit.fixed == ("beta",) and fit.params.beta == 0.0
        assert fit.std_errors[1] == 0.0
        # one-sided first-order condition on the pinned coordinate
        assert score(fit.params, FLOOD)[1] <= 0.0

    def test_covid_mle(self):
        fit = fit_mle(COVID)
        np.testing.assert_array_less(np.abs(fit.params.as_array() / [11.7507, 1.7358, 30.6509] - 1), [1e-2, 1e-2, 1e-3])


class TestIntervals:
    def test_wald_form(self):
        fit = fit_mle(COVID)
        cis = asymptotic_cis(fit, 0.9)
        z = 1.6448536269514722
        for ci, est, se in zip(cis, fit.params.as_array(), fit.std_errors):
            assert ci.lower == pytest.approx(est - z * se, rel=1e-12)
            assert ci.upper == pytest.approx(est + z * se, rel=1e-12)
            assert ci.level == 0.9

    def test_lower_bounds_not_truncated(self):
        cis = asymptotic_cis(fit_mle(COVID))
        assert cis[1].lower < 0

    def test_zero_variance_is_degenerate(self):
        fit = fit_mle(FLOOD)
        beta = asymptotic_cis(fit)[1]
        assert beta.lower == beta.upper == fit.params.beta

    def test_flood_alpha_interval(self):
        alpha = asymptotic_cis(fit_mle(FLOOD))[0]
        assert alpha.lower == pytest.approx(1421.6925, rel=0.02)
        assert alpha.upper == pytest.approx(3332.7552, rel=0.02)

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.5, 1.5])
    def test_level_validation(self, level):
        with pytest.raises(ValueError):
            asymptotic_cis(fit_mle(COVID), level)

    @pytest.mark.xfail(strict=True, reason="published Covid theta interval is not reproducible from the "
                                           "published point estimate; see decisions ledger")
    def test_covid_theta_interval(self):
        theta = asymptotic_cis(fit_mle(COVID))[2]
        assert theta.lower == pytest.approx(0.8895, rel=0.02)
        assert theta.upper == pytest.approx(68.4806, rel=0.02)


@pytest.mark.xfail(strict=True, reason="published flood estimate is not a local maximum of the likelihood; "
                                       "the supremum lies on beta = 0")
def test_published_flood_point_is_grid_maximum():
    p0 = np.array([2377.2233, 2.2279, 1.1717])
    l0 = log_likelihood(Params(*p0), FLOOD)
    for fa in (0.99, 1.0, 1.01):
        for fb in (0.5, 1.0, 2.0):
            for ft in (0.99, 1.0, 1.01):
                assert log_likelihood(Params(*(p0 * [fa, fb, ft])), FLOOD) <= l0 + 1e-9
