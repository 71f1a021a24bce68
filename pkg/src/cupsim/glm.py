"""Univariate Poisson regression with log link, fitted by IRLS.

Provides the fitting routine used for the per-team attack/defense
regressions plus the diagnostics that go into the numeric report dumps:
null/residual deviance, chi-square goodness of fit and AIC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammaincc

from cupsim.errors import FitError

# IRLS stopping rules: relative log-likelihood change, gradient sup-norm on
# the internally rescaled design, and the iteration cap.
LOGLIK_RTOL = 1e-10
GRAD_TOL = 1e-10
MAX_ITER = 100


@dataclass
class PoissonFit:
    """Result of a Poisson log-link regression.

    ``coefficients`` has the intercept first, remaining entries in the order
    of the observation covariates, reported in the *unscaled* covariate
    parameterization.
    """

    coefficients: np.ndarray
    loglik: float
    aic: float
    n_obs: int
    fitted_means: np.ndarray
    std_errors: np.ndarray

    @property
    def n_params(self) -> int:
        return len(self.coefficients)


@dataclass
class DevianceReport:
    null_deviance: float
    residual_deviance: float
    df_null: int
    df_residual: int
    p_value: float


@dataclass
class GofReport:
    chi_statistic: float
    df: int
    p_value: float
    n_matches: int


def chi_square_upper_tail(x: float, df: int) -> float:
    """P[chi2_df >= x] via the regularized upper incomplete gamma."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return float(gammaincc(df / 2.0, x / 2.0))


def build_design(observations) -> tuple[np.ndarray, np.ndarray]:
    """Split (covariates, count) pairs into a design matrix (intercept first) and response."""
    rows = []
    counts = []
    for covariates, count in observations:
        rows.append([1.0, *np.atleast_1d(np.asarray(covariates, dtype=float))])
        counts.append(count)
    X = np.asarray(rows, dtype=float)
    y = np.asarray(counts, dtype=float)
    if np.any(y < 0):
        raise ValueError("counts must be non-negative")
    return X, y


def poisson_loglik(coefficients: np.ndarray, X: np.ndarray, y: np.ndarray,
                   weights: np.ndarray | None = None) -> float:
    """Poisson log-likelihood (including the log y! constant) at given coefficients."""
    eta = X @ coefficients
    mu = np.exp(eta)
    terms = y * eta - mu - gammaln(y + 1.0)
    if weights is not None:
        terms = weights * terms
    return float(np.sum(terms))


def poisson_gradient(coefficients: np.ndarray, X: np.ndarray, y: np.ndarray,
                     weights: np.ndarray | None = None) -> np.ndarray:
    """Gradient of the Poisson log-likelihood with respect to the coefficients."""
    resid = y - np.exp(X @ coefficients)
    if weights is not None:
        resid = weights * resid
    return X.T @ resid


def fit_poisson(observations, weights=None) -> PoissonFit:
    """Fit a Poisson log-link regression by iteratively reweighted least squares.

    ``observations`` is an iterable of ``(covariates, count)`` pairs; an
    intercept column is prepended automatically. ``weights`` (optional prior
    weights, used by the EM M-steps) must align with the observations.

    Raises FitError on a rank-deficient design or failure to converge; the
    non-convergence error carries the log-likelihood trace.
    """
    X, y = build_design(observations)
    n, p = X.shape
    if n < 2:
        raise FitError(f"need at least 2 observations, got {n}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise FitError(f"weights shape {w.shape} does not match {n} observations")
    if np.any(w < 0):
        raise FitError("weights must be non-negative")

    # Rescale covariate columns to max-abs 1 so raw Elo scores (~2000) do not
    # wreck the conditioning of the normal equations; coefficients are mapped
    # back to the raw parameterization on output.
    scale = np.ones(p)
    for j in range(1, p):
        col_max = np.max(np.abs(X[:, j]))
        if col_max > 0:
            scale[j] = col_max
    Xs = X / scale

    if np.linalg.matrix_rank(Xs) < p:
        raise FitError("rank-deficient design matrix")

    # Intercept-only start: log of the (weighted) mean response.
    wsum = np.sum(w)
    if wsum <= 0:
        raise FitError("all weights are zero")
    beta = np.zeros(p)
    beta[0] = np.log(max(np.sum(w * y) / wsum, 1e-8))

    ll = poisson_loglik(beta, Xs, y, w)
    trace = [ll]
    converged = False
    for _ in range(MAX_ITER):
        mu = np.exp(Xs @ beta)
        grad = Xs.T @ (w * (y - mu))
        irls_w = w * mu
        XtWX = Xs.T @ (Xs * irls_w[:, None])
        try:
            step = np.linalg.solve(XtWX, grad)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"singular IRLS system: {exc}", trace=trace) from exc

        # Halve the Newton step until the log-likelihood stops decreasing.
        alpha = 1.0
        new_ll = -np.inf
        for _ in range(30):
            candidate = beta + alpha * step
            new_ll = poisson_loglik(candidate, Xs, y, w)
            if np.isfinite(new_ll) and new_ll >= ll - 1e-13 * max(1.0, abs(ll)):
                break
            alpha *= 0.5
        beta = beta + alpha * step
        trace.append(new_ll)

        rel_change = abs(new_ll - ll) / max(1.0, abs(new_ll))
        ll = new_ll
        if np.max(np.abs(Xs.T @ (w * (y - np.exp(Xs @ beta))))) < GRAD_TOL:
            converged = True
            break
        if rel_change < LOGLIK_RTOL:
            converged = True
            break
    if not converged:
        raise FitError(f"IRLS did not converge in {MAX_ITER} iterations", trace=trace)

    mu = np.exp(Xs @ beta)
    XtWX = Xs.T @ (Xs * (w * mu)[:, None])
    cov_scaled = np.linalg.inv(XtWX)
    beta_raw = beta / scale
    se_raw = np.sqrt(np.diag(cov_scaled)) / scale
    loglik = poisson_loglik(beta_raw, X, y, w)
    return PoissonFit(
        coefficients=beta_raw,
        loglik=loglik,
        aic=2.0 * p - 2.0 * loglik,
        n_obs=n,
        fitted_means=np.exp(X @ beta_raw),
        std_errors=se_raw,
    )


def _poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    # x*ln(x/mu) with the x=0 term resolved by the x*ln(x) -> 0 limit.
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0) / mu), 0.0)
    return max(float(2.0 * np.sum(term - (y - mu))), 0.0)


def deviance_report(fit: PoissonFit, observations) -> DevianceReport:
    """Null and residual deviance for a fit, with the residual-deviance p-value."""
    X, y = build_design(observations)
    if len(y) != fit.n_obs:
        raise ValueError("observations do not match the fit")
    residual = _poisson_deviance(y, fit.fitted_means)
    null_mu = np.full_like(y, np.mean(y))
    null = _poisson_deviance(y, null_mu)
    df_null = fit.n_obs - 1
    df_residual = fit.n_obs - fit.n_params
    if df_residual > 0:
        p_value = chi_square_upper_tail(residual, df_residual)
    else:
        # Saturated fit: residual deviance is zero up to rounding.
        p_value = 1.0
    return DevianceReport(
        null_deviance=null,
        residual_deviance=residual,
        df_null=df_null,
        df_residual=df_residual,
        p_value=p_value,
    )


def gof_chi_square(fit: PoissonFit, observations) -> GofReport:
    """Pearson chi-square statistic of the fitted means against the counts."""
    X, y = build_design(observations)
    if len(y) != fit.n_obs:
        raise ValueError("observations do not match the fit")
    mu = fit.fitted_means
    if np.any(mu <= 0):
        raise ValueError("all fitted means must be positive")
    chi = float(np.sum((y - mu) ** 2 / mu))
    df = fit.n_obs - fit.n_params
    if df <= 0:
        raise FitError(f"overparameterized: {fit.n_obs} observations, {fit.n_params} coefficients")
    return GofReport(
        chi_statistic=chi,
        df=df,
        p_value=chi_square_upper_tail(chi, df),
        n_matches=fit.n_obs,
    )
