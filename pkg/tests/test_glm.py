import math

import numpy as np
import pytest

from cupsim import glm
from cupsim.errors import FitError


def _two_point_oracle(x1, m1, x2, m2):
    # Saturated two-group Poisson MLE: fitted means are the group means, so
    # the log-linear fit passes through (x1, ln m1) and (x2, ln m2).
    slope = (math.log(m2) - math.log(m1)) / (x2 - x1)
    intercept = math.log(m1) - slope * x1
    return intercept, slope


def test_constant_counts_intercept_only():
    obs = [((), 3) for _ in range(8)]
    fit = glm.fit_poisson(obs)
    assert fit.n_params == 1
    assert fit.coefficients[0] == pytest.approx(math.log(3.0), abs=1e-10)


def test_two_point_interpolation_matches_closed_form():
    x1, x2 = 1600.0, 2000.0
    counts1 = [1, 2, 3]      # mean 2
    counts2 = [0, 1, 2]      # mean 1
    obs = [((x1,), c) for c in counts1] + [((x2,), c) for c in counts2]
    fit = glm.fit_poisson(obs)
    intercept, slope = _two_point_oracle(x1, 2.0, x2, 1.0)
    assert fit.coefficients[0] == pytest.approx(intercept, abs=1e-8)
    assert fit.coefficients[1] == pytest.approx(slope, abs=1e-12)


def test_synthetic_recovery_within_three_se():
    rng = np.random.default_rng(20180614)
    true = np.array([0.5, -0.001])
    x = rng.uniform(1500.0, 2100.0, size=10_000)
    y = rng.poisson(np.exp(true[0] + true[1] * x))
    fit = glm.fit_poisson(list(zip(x[:, None], y)))
    for est, se, truth in zip(fit.coefficients, fit.std_errors, true):
        assert abs(est - truth) < 3.0 * se


def test_gradient_near_zero_at_optimum():
    rng = np.random.default_rng(7)
    x = rng.uniform(1500.0, 2100.0, size=200)
    y = rng.poisson(np.exp(0.3 - 0.0005 * x))
    fit = glm.fit_poisson(list(zip(x[:, None], y)))
    X, yy = glm.build_design(list(zip(x[:, None], y)))
    # Gradient on the rescaled design (covariate max-abs 1), matching the
    # parameterization the solver actually works in.
    scale = np.array([1.0, np.max(np.abs(x))])
    grad = glm.poisson_gradient(fit.coefficients * scale, X / scale, yy)
    assert np.max(np.abs(grad)) < 1e-8


def test_local_optimality_probe():
    rng = np.random.default_rng(11)
    x = rng.uniform(1500.0, 2100.0, size=150)
    y = rng.poisson(np.exp(0.2 - 0.0004 * x))
    obs = list(zip(x[:, None], y))
    fit = glm.fit_poisson(obs)
    X, yy = glm.build_design(obs)
    best = glm.poisson_loglik(fit.coefficients, X, yy)
    for j in range(fit.n_params):
        for delta in (-1e-3, 1e-3):
            perturbed = fit.coefficients.copy()
            perturbed[j] += delta
            assert glm.poisson_loglik(perturbed, X, yy) <= best + 1e-9


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(23)
    x = rng.uniform(1.0, 3.0, size=60)
    y = rng.poisson(np.exp(0.5 + 0.3 * x))
    X, yy = glm.build_design(list(zip(x[:, None], y)))
    h = 1e-5
    for _ in range(10):
        beta = rng.normal(0.0, 0.5, size=2)
        analytic = glm.poisson_gradient(beta, X, yy)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            numeric = (glm.poisson_loglik(beta + e, X, yy)
                       - glm.poisson_loglik(beta - e, X, yy)) / (2 * h)
            assert analytic[j] == pytest.approx(numeric, rel=1e-5, abs=1e-7)


def test_aic_identity():
    obs = [((1.0,), 2), ((2.0,), 3), ((3.0,), 1), ((4.0,), 4)]
    fit = glm.fit_poisson(obs)
    assert fit.aic == 2 * fit.n_params - 2 * fit.loglik


def test_fitted_means_match_coefficients():
    obs = [((1.0,), 2), ((2.0,), 3), ((3.0,), 1), ((4.0,), 4)]
    fit = glm.fit_poisson(obs)
    X, _ = glm.build_design(obs)
    np.testing.assert_allclose(fit.fitted_means, np.exp(X @ fit.coefficients), rtol=1e-12)


def test_rank_deficient_design_raises():
    obs = [((1.0, 2.0), 1), ((2.0, 4.0), 2), ((3.0, 6.0), 3)]
    with pytest.raises(FitError, match="rank-deficient"):
        glm.fit_poisson(obs)


def _deviance_oracle(y, mu):
    total = 0.0
    for yi, mi in zip(y, mu):
        if yi > 0:
            total += yi * math.log(yi / mi) - (yi - mi)
        else:
            total += mi
    return 2.0 * total


class TestDeviance:
    def test_perfect_fit_zero_residual(self):
        obs = [((1600.0,), 2), ((1600.0,), 2), ((2000.0,), 1), ((2000.0,), 1)]
        fit = glm.fit_poisson(obs)
        rep = glm.deviance_report(fit, obs)
        assert rep.residual_deviance == pytest.approx(0.0, abs=1e-9)

    def test_intercept_only_residual_equals_null(self):
        obs = [((), c) for c in [0, 1, 2, 3, 1, 2]]
        fit = glm.fit_poisson(obs)
        rep = glm.deviance_report(fit, obs)
        assert rep.residual_deviance == pytest.approx(rep.null_deviance, abs=1e-10)

    def test_matches_independent_formula(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(1500.0, 2100.0, size=40)
        y = rng.poisson(np.exp(0.4 - 0.0005 * x))
        obs = list(zip(x[:, None], y))
        fit = glm.fit_poisson(obs)
        rep = glm.deviance_report(fit, obs)
        assert rep.residual_deviance == pytest.approx(
            _deviance_oracle(y, fit.fitted_means), abs=1e-10)
        assert rep.null_deviance == pytest.approx(
            _deviance_oracle(y, np.full_like(y, np.mean(y), dtype=float)), abs=1e-10)
        assert rep.residual_deviance <= rep.null_deviance + 1e-8
        assert 0.0 <= rep.p_value <= 1.0


class TestGof:
    def test_perfect_fit(self):
        obs = [((1600.0,), 2), ((1600.0,), 2), ((2000.0,), 1), ((2000.0,), 1)]
        fit = glm.fit_poisson(obs)
        rep = glm.gof_chi_square(fit, obs)
        assert rep.chi_statistic == pytest.approx(0.0, abs=1e-12)
        assert rep.p_value == pytest.approx(1.0, abs=1e-9)
        assert rep.n_matches == 4

    def test_single_term_by_hand(self):
        # (4 - 2)^2 / 2 = 2.0 with one observation and a pinned mean.
        fit = glm.PoissonFit(
            coefficients=np.array([]),
            loglik=0.0, aic=0.0, n_obs=1,
            fitted_means=np.array([2.0]),
            std_errors=np.array([]),
        )
        rep = glm.gof_chi_square(fit, [((), 4)])
        assert rep.chi_statistic == pytest.approx(2.0, abs=1e-15)
        assert rep.df == 1

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(1500.0, 2100.0, size=30)
        y = rng.poisson(np.exp(0.4 - 0.0005 * x))
        obs = list(zip(x[:, None], y))
        fit = glm.fit_poisson(obs)
        rep = glm.gof_chi_square(fit, obs)
        direct = sum((yi - mi) ** 2 / mi for yi, mi in zip(y, fit.fitted_means))
        assert rep.chi_statistic == pytest.approx(direct, abs=1e-12)

    def test_overparameterized_raises(self):
        fit = glm.PoissonFit(
            coefficients=np.array([0.0, 0.0]),
            loglik=0.0, aic=0.0, n_obs=2,
            fitted_means=np.array([1.0, 1.0]),
            std_errors=np.array([0.0, 0.0]),
        )
        with pytest.raises(FitError, match="overparameterized"):
            glm.gof_chi_square(fit, [((1.0,), 1), ((2.0,), 1)])


class TestChiSquareTail:
    def test_zero_statistic_full_mass(self):
        assert glm.chi_square_upper_tail(0.0, 3) == pytest.approx(1.0, abs=1e-12)

    def test_df2_closed_form(self):
        # chi2 with 2 df is Exp(1/2): P[X >= x] = exp(-x/2).
        x = 2.0 * math.log(2.0)
        assert glm.chi_square_upper_tail(x, 2) == pytest.approx(0.5, abs=1e-10)

    def test_df1_normal_identity(self):
        assert glm.chi_square_upper_tail(3.841, 1) == pytest.approx(0.05, abs=5e-4)

    def test_monotone_in_statistic(self):
        values = [glm.chi_square_upper_tail(x, 4) for x in np.linspace(0.0, 30.0, 50)]
        assert all(a >= b for a, b in zip(values, values[1:]))
