"""Bivariate Poisson distribution and its regression estimation by EM.

The joint law is the trivariate reduction (Y1, Y2) = (X1 + X0, X2 + X0)
with X1, X2, X0 independent Poisson. Per-team regression ties the two
marginal components to the opponent's Elo score through a log link while
the shared component stays an intercept-only rate. A diagonal-inflated
mixture variant puts extra mass on the drawn scores 0:0, 1:1 and 2:2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from cupsim.errors import FitError
from cupsim import glm

EM_TOL = 1e-8
EM_MAX_ITER = 500
TAU_FLOOR = 1e-8

# Diagonal scores eligible for inflation, in theta order.
DIAGONAL_SCORES = (0, 1, 2)


@dataclass
class BivariateRates:
    """Rate triple (lambda1, lambda2, lambda0) of a bivariate Poisson pair."""

    lambda1: float
    lambda2: float
    lambda0: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0 and self.lambda0 >= 0):
            raise ValueError(
                f"invalid rates ({self.lambda1}, {self.lambda2}, {self.lambda0})")

    @property
    def marginal_means(self) -> tuple[float, float]:
        return (self.lambda1 + self.lambda0, self.lambda2 + self.lambda0)

    @property
    def covariance(self) -> float:
        return self.lambda0

    def scaled(self, factor: float) -> "BivariateRates":
        return BivariateRates(self.lambda1 * factor, self.lambda2 * factor,
                              self.lambda0 * factor)


@dataclass
class BivariateTeamFit:
    """Fitted per-team bivariate regression coefficients.

    ``mu_coeffs``/``nu_coeffs`` are (intercept, Elo slope) for the scored /
    conceded components; ``tau_coeff`` is the log of the shared rate.
    """

    mu_coeffs: tuple[float, float]
    nu_coeffs: tuple[float, float]
    tau_coeff: float
    loglik: float
    aic: float
    tau_at_bound: bool = False
    loglik_trace: list[float] = field(default_factory=list)

    @property
    def tau(self) -> float:
        return math.exp(self.tau_coeff)

    def mu(self, opponent_elo: float) -> float:
        return math.exp(self.mu_coeffs[0] + self.mu_coeffs[1] * opponent_elo)

    def nu(self, opponent_elo: float) -> float:
        return math.exp(self.nu_coeffs[0] + self.nu_coeffs[1] * opponent_elo)


@dataclass
class DiagonalInflation:
    """Mixture weight p and the diagonal distribution theta over 0:0, 1:1, 2:2."""

    p: float
    theta: tuple[float, float, float]

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be a probability, got {self.p}")
        if min(self.theta) < -1e-12 or abs(sum(self.theta) - 1.0) > 1e-9:
            raise ValueError(f"theta must be a distribution, got {self.theta}")


def bivpois_log_pmf(y1: int, y2: int, rates: BivariateRates) -> float:
    """Log of P[Y1=y1, Y2=y2], summed over the shared component in log space."""
    if y1 < 0 or y2 < 0:
        return -math.inf
    l1, l2, l0 = rates.lambda1, rates.lambda2, rates.lambda0
    kmax = min(y1, y2)
    if l0 == 0.0:
        ks = np.array([0])
    else:
        ks = np.arange(kmax + 1)
    with np.errstate(divide="ignore"):
        log_l1 = np.log(l1)
        log_l2 = np.log(l2)
    if l0 > 0:
        k_term = ks * math.log(l0)
    else:
        k_term = np.where(ks > 0, -np.inf, 0.0)
    terms = ((y1 - ks) * log_l1 - gammaln(y1 - ks + 1)
             + (y2 - ks) * log_l2 - gammaln(y2 - ks + 1)
             + k_term - gammaln(ks + 1))
    return float(-(l1 + l2 + l0) + logsumexp(terms))


def bivpois_pmf(y1: int, y2: int, rates: BivariateRates) -> float:
    return math.exp(bivpois_log_pmf(y1, y2, rates))


def bivpois_sample(rates: BivariateRates, rng: np.random.Generator, size=None):
    """Draw (Y1, Y2) = (X1+X0, X2+X0) from three independent Poisson streams.

    With ``size`` set, returns two integer arrays instead of a scalar pair.
    """
    x0 = rng.poisson(rates.lambda0, size=size)
    x1 = rng.poisson(rates.lambda1, size=size)
    x2 = rng.poisson(rates.lambda2, size=size)
    if size is None:
        return int(x1 + x0), int(x2 + x0)
    return x1 + x0, x2 + x0


def _split_observations(observations):
    elo = np.array([o[0] for o in observations], dtype=float)
    g_for = np.array([o[1] for o in observations], dtype=float)
    g_against = np.array([o[2] for o in observations], dtype=float)
    if np.any(g_for < 0) or np.any(g_against < 0):
        raise ValueError("goal counts must be non-negative")
    return elo, g_for, g_against


def _component_rates(elo, mu_c, nu_c, tau_c):
    lam1 = np.exp(mu_c[0] + mu_c[1] * elo)
    lam2 = np.exp(nu_c[0] + nu_c[1] * elo)
    return lam1, lam2, math.exp(tau_c)


def _batch_log_pmf(y1, y2, lam1, lam2, lam0) -> np.ndarray:
    """Vectorized bivariate log-pmf over aligned observation arrays."""
    y1 = np.asarray(y1, dtype=int)
    y2 = np.asarray(y2, dtype=int)
    kmax = np.minimum(y1, y2)
    ks = np.arange(int(kmax.max()) + 1)[None, :]
    valid = ks <= kmax[:, None]
    a1 = np.where(valid, y1[:, None] - ks, 0)
    a2 = np.where(valid, y2[:, None] - ks, 0)
    if lam0 > 0:
        k_term = ks * math.log(lam0)
    else:
        k_term = np.where(ks > 0, -np.inf, 0.0)
    terms = (a1 * np.log(lam1)[:, None] - gammaln(a1 + 1)
             + a2 * np.log(lam2)[:, None] - gammaln(a2 + 1)
             + k_term - gammaln(ks + 1))
    terms = np.where(valid, terms, -np.inf)
    return -(lam1 + lam2 + lam0) + logsumexp(terms, axis=1)


def _observed_loglik(g_for, g_against, lam1, lam2, lam0) -> float:
    return float(np.sum(_batch_log_pmf(g_for, g_against, lam1, lam2, lam0)))


def _latent_shared_expectation(g_for, g_against, lam1, lam2, lam0) -> np.ndarray:
    """E[X0 | Y1, Y2] per observation under the current rates."""
    s = np.zeros(len(g_for))
    if lam0 <= 0:
        return s
    inner = (g_for >= 1) & (g_against >= 1)
    if not np.any(inner):
        return s
    y1, y2 = g_for[inner], g_against[inner]
    l1, l2 = lam1[inner], lam2[inner]
    log_ratio = (_batch_log_pmf(y1 - 1, y2 - 1, l1, l2, lam0)
                 - _batch_log_pmf(y1, y2, l1, l2, lam0))
    s[inner] = lam0 * np.exp(log_ratio)
    return s


def _weighted_glm_coeffs(elo, response, weights) -> tuple[float, float]:
    fit = glm.fit_poisson(list(zip(elo[:, None], response)), weights=weights)
    return (float(fit.coefficients[0]), float(fit.coefficients[1]))


def fit_bivpois_em(observations) -> BivariateTeamFit:
    """Fit the bivariate Poisson regression for one team by EM.

    E-step computes the expected shared component X0 given each observed
    score pair; M-step runs two Elo-covariate Poisson regressions on the
    adjusted responses and re-estimates the constant shared rate. The
    observed-data log-likelihood trace is recorded on the returned fit.
    """
    if len(observations) < 6:
        raise FitError(f"need at least 6 observations, got {len(observations)}")
    elo, g_for, g_against = _split_observations(observations)

    mu_start = glm.fit_poisson(list(zip(elo[:, None], g_for)))
    nu_start = glm.fit_poisson(list(zip(elo[:, None], g_against)))
    mu_c = (float(mu_start.coefficients[0]), float(mu_start.coefficients[1]))
    nu_c = (float(nu_start.coefficients[0]), float(nu_start.coefficients[1]))

    at_bound = not np.any((g_for >= 1) & (g_against >= 1))
    tau_c = math.log(TAU_FLOOR) if at_bound else math.log(0.1)

    lam1, lam2, lam0 = _component_rates(elo, mu_c, nu_c, tau_c)
    ll = _observed_loglik(g_for, g_against, lam1, lam2, lam0)
    trace = [ll]
    for _ in range(EM_MAX_ITER):
        s = _latent_shared_expectation(g_for, g_against, lam1, lam2, lam0)
        mu_c = _weighted_glm_coeffs(elo, np.maximum(g_for - s, 0.0), None)
        nu_c = _weighted_glm_coeffs(elo, np.maximum(g_against - s, 0.0), None)
        mean_s = float(np.mean(s))
        if mean_s < TAU_FLOOR:
            tau_c = math.log(TAU_FLOOR)
            at_bound = True
        else:
            tau_c = math.log(mean_s)
            at_bound = False
        lam1, lam2, lam0 = _component_rates(elo, mu_c, nu_c, tau_c)
        new_ll = _observed_loglik(g_for, g_against, lam1, lam2, lam0)
        trace.append(new_ll)
        if new_ll - ll < EM_TOL:
            break
        ll = new_ll

    loglik = trace[-1]
    return BivariateTeamFit(
        mu_coeffs=mu_c,
        nu_coeffs=nu_c,
        tau_coeff=tau_c,
        loglik=loglik,
        aic=2.0 * 5 - 2.0 * loglik,
        tau_at_bound=at_bound,
        loglik_trace=trace,
    )


def fit_inflated_em(observations, inflate: bool = True):
    """Fit the diagonal-inflated mixture (1-p)*BP + p*Diag(theta) by EM.

    Returns ``(fit, inflation, aic)`` where ``aic`` counts the five
    regression coefficients plus three effective mixture parameters. With
    ``inflate=False`` the plain fit is returned with p = 0.
    """
    base = fit_bivpois_em(observations)
    if not inflate:
        return base, DiagonalInflation(0.0, (1.0, 0.0, 0.0)), base.aic

    elo, g_for, g_against = _split_observations(observations)
    n = len(elo)
    diag_index = np.full(n, -1)
    for i, (y1, y2) in enumerate(zip(g_for, g_against)):
        if y1 == y2 and int(y1) in DIAGONAL_SCORES:
            diag_index[i] = int(y1)

    mu_c, nu_c, tau_c = base.mu_coeffs, base.nu_coeffs, base.tau_coeff
    p = 0.05
    counts = np.array([np.sum(diag_index == d) for d in DIAGONAL_SCORES], dtype=float)
    theta = counts / counts.sum() if counts.sum() > 0 else np.full(3, 1.0 / 3.0)

    diag_mass = np.zeros(n)

    def refresh_diag_mass():
        for d in DIAGONAL_SCORES:
            diag_mass[diag_index == d] = theta[d]

    def mixture_loglik(lam1, lam2, lam0):
        bp = np.exp(_batch_log_pmf(g_for, g_against, lam1, lam2, lam0))
        mass = (1.0 - p) * bp + p * diag_mass
        return float(np.sum(np.log(np.maximum(mass, 1e-300))))

    refresh_diag_mass()
    lam1, lam2, lam0 = _component_rates(elo, mu_c, nu_c, tau_c)
    ll = mixture_loglik(lam1, lam2, lam0)
    trace = [ll]
    at_bound = base.tau_at_bound
    for _ in range(EM_MAX_ITER):
        # E-step: mixture membership for diagonal scores, shared-component
        # expectation for the bivariate branch.
        bp = np.exp(_batch_log_pmf(g_for, g_against, lam1, lam2, lam0))
        inflated = p * diag_mass
        denom = (1.0 - p) * bp + inflated
        w = np.where(denom > 0, inflated / np.maximum(denom, 1e-300), 0.0)
        s = _latent_shared_expectation(g_for, g_against, lam1, lam2, lam0)

        # M-step.
        p = float(np.mean(w))
        w_sum = w.sum()
        if w_sum > 0:
            theta = np.array([w[diag_index == d].sum() for d in DIAGONAL_SCORES]) / w_sum
        refresh_diag_mass()
        bp_w = 1.0 - w
        bp_w_sum = bp_w.sum()
        if bp_w_sum > 1e-8:
            mu_c = _weighted_glm_coeffs(elo, np.maximum(g_for - s, 0.0), bp_w)
            nu_c = _weighted_glm_coeffs(elo, np.maximum(g_against - s, 0.0), bp_w)
            mean_s = float(np.sum(bp_w * s) / bp_w_sum)
            if mean_s < TAU_FLOOR:
                tau_c = math.log(TAU_FLOOR)
                at_bound = True
            else:
                tau_c = math.log(mean_s)
                at_bound = False

        lam1, lam2, lam0 = _component_rates(elo, mu_c, nu_c, tau_c)
        new_ll = mixture_loglik(lam1, lam2, lam0)
        trace.append(new_ll)
        if new_ll - ll < EM_TOL:
            break
        ll = new_ll

    loglik = trace[-1]
    aic = 2.0 * (5 + 3) - 2.0 * loglik
    fit = BivariateTeamFit(
        mu_coeffs=mu_c,
        nu_coeffs=nu_c,
        tau_coeff=tau_c,
        loglik=loglik,
        aic=aic,
        tau_at_bound=at_bound,
        loglik_trace=trace,
    )
    theta_t = (float(theta[0]), float(theta[1]), float(theta[2]))
    return fit, DiagonalInflation(float(p), theta_t), aic


def combine_rates(fit_a: BivariateTeamFit, fit_b: BivariateTeamFit,
                  elo_a: float, elo_b: float) -> BivariateRates:
    """Average the two team viewpoints into one match rate triple."""
    lambda1 = 0.5 * (fit_a.mu(elo_b) + fit_b.nu(elo_a))
    lambda2 = 0.5 * (fit_b.mu(elo_a) + fit_a.nu(elo_b))
    lambda0 = 0.5 * (fit_a.tau + fit_b.tau)
    return BivariateRates(lambda1, lambda2, lambda0)
