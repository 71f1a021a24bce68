"""The four match-score model families behind one sampling interface.

Families: ``independent`` (two independent Poisson draws), ``bivariate``
(shared-component bivariate Poisson), ``inflated`` (bivariate plus a
diagonal draw mixture) and ``nested`` (the weaker team's goals regressed
on the stronger team's realized goals).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from cupsim import dataio, glm
from cupsim.bivpois import (
    BivariateRates,
    BivariateTeamFit,
    DiagonalInflation,
    bivpois_sample,
    combine_rates,
    fit_bivpois_em,
    fit_inflated_em,
)
from cupsim.errors import CupsimError, FitError, InsufficientDataError

MODEL_FAMILIES = ("independent", "bivariate", "inflated", "nested")

# Fit refuses to run below these observation counts.
MIN_OBS_INDEPENDENT = 5
MIN_OBS_BIVARIATE = 6
MIN_OBS_NESTED = 6

# Guard rail for regression extrapolation: scoring rates beyond this are
# fit pathologies, and unbounded rates let one freak scoreline wreck the
# Elo table (the goal-margin multiplier grows without bound). Goal counts
# themselves stay untruncated.
MAX_RATE = 50.0


def _clamp_rate(rate):
    return np.clip(rate, 1e-8, MAX_RATE)

DIAGONAL_SCORES = (0, 1, 2)


@dataclass
class ScoreLine:
    goals_a: int
    goals_b: int

    def __post_init__(self):
        if self.goals_a < 0 or self.goals_b < 0:
            raise ValueError("goals must be non-negative")

    @property
    def margin(self) -> int:
        return abs(self.goals_a - self.goals_b)


@dataclass
class MatchRates:
    """Per-match Poisson parameters for one pairing.

    ``lambda_a_given_b``/``lambda_b_given_a`` always hold the per-team
    scoring rates (marginal means for the bivariate families, which also
    carry their full rate triple and optional inflation mixture).
    """

    lambda_a_given_b: float
    lambda_b_given_a: float
    bivariate: BivariateRates | None = None
    inflation: DiagonalInflation | None = None

    def __post_init__(self):
        ok = (math.isfinite(self.lambda_a_given_b) and self.lambda_a_given_b > 0
              and math.isfinite(self.lambda_b_given_a) and self.lambda_b_given_a > 0)
        if not ok:
            raise ValueError(
                f"rates must be positive finite, got "
                f"({self.lambda_a_given_b}, {self.lambda_b_given_a})")


@dataclass
class TeamCoefficients:
    """Everything fitted for one team, one entry per model family."""

    team: str
    attack: tuple[float, float] | None = None
    defense: tuple[float, float] | None = None
    bivariate: BivariateTeamFit | None = None
    inflated_bivariate: BivariateTeamFit | None = None
    inflation: DiagonalInflation | None = None
    nested_gamma: tuple[float, float, float] | None = None

    def mu(self, opponent_elo: float) -> float:
        return math.exp(self.attack[0] + self.attack[1] * opponent_elo)

    def nu(self, opponent_elo: float) -> float:
        return math.exp(self.defense[0] + self.defense[1] * opponent_elo)


def rates_independent(coeffs_a: TeamCoefficients, coeffs_b: TeamCoefficients,
                      elo_a: float, elo_b: float) -> MatchRates:
    """Average attack/defense viewpoints into the two independent match rates."""
    lam_ab = 0.5 * (coeffs_a.mu(elo_b) + coeffs_b.nu(elo_a))
    lam_ba = 0.5 * (coeffs_b.mu(elo_a) + coeffs_a.nu(elo_b))
    return MatchRates(float(_clamp_rate(lam_ab)), float(_clamp_rate(lam_ba)))


def rates_bivariate(coeffs_a: TeamCoefficients, coeffs_b: TeamCoefficients,
                    elo_a: float, elo_b: float, inflated: bool = False) -> MatchRates:
    """Match rate triple for the bivariate families, marginal means on top."""
    fit_a = coeffs_a.inflated_bivariate if inflated else coeffs_a.bivariate
    fit_b = coeffs_b.inflated_bivariate if inflated else coeffs_b.bivariate
    if fit_a is None or fit_b is None:
        missing = coeffs_a.team if fit_a is None else coeffs_b.team
        raise CupsimError(f"no bivariate fit for {missing}")
    triple = combine_rates(fit_a, fit_b, elo_a, elo_b)
    triple = BivariateRates(float(_clamp_rate(triple.lambda1)),
                            float(_clamp_rate(triple.lambda2)),
                            float(min(triple.lambda0, MAX_RATE)))
    inflation = None
    if inflated:
        pa, pb = coeffs_a.inflation, coeffs_b.inflation
        if pa is None or pb is None:
            missing = coeffs_a.team if pa is None else coeffs_b.team
            raise CupsimError(f"no inflation fit for {missing}")
        # Average the two team mixtures, mirroring the rate averaging.
        p = 0.5 * (pa.p + pb.p)
        theta = tuple(0.5 * (x + y) for x, y in zip(pa.theta, pb.theta))
        inflation = DiagonalInflation(p, theta)
    means = triple.marginal_means
    return MatchRates(means[0], means[1], bivariate=triple, inflation=inflation)


def sample_independent(rates: MatchRates, rng: np.random.Generator, size=None):
    """Two independent Poisson draws at the match rates."""
    ga = rng.poisson(rates.lambda_a_given_b, size=size)
    gb = rng.poisson(rates.lambda_b_given_a, size=size)
    if size is None:
        return ScoreLine(int(ga), int(gb))
    return ga, gb


def sample_bivariate(rates: BivariateRates, inflation: DiagonalInflation | None,
                     rng: np.random.Generator, size=None):
    """Bivariate Poisson draw, optionally mixed with a diagonal inflation draw."""
    if inflation is None or inflation.p == 0.0:
        pair = bivpois_sample(rates, rng, size=size)
        if size is None:
            return ScoreLine(pair[0], pair[1])
        return pair
    if size is None:
        if rng.random() < inflation.p:
            d = int(rng.choice(len(DIAGONAL_SCORES), p=inflation.theta))
            return ScoreLine(d, d)
        pair = bivpois_sample(rates, rng)
        return ScoreLine(pair[0], pair[1])
    ga, gb = bivpois_sample(rates, rng, size=size)
    use_diag = rng.random(size) < inflation.p
    diag = rng.choice(len(DIAGONAL_SCORES), size=size, p=inflation.theta)
    ga = np.where(use_diag, diag, ga)
    gb = np.where(use_diag, diag, gb)
    return ga, gb


def _nested_orientation(team_a: str, team_b: str, elo_a: float, elo_b: float) -> bool:
    """True when team A takes the stronger role (Elo, then lexicographic id)."""
    if elo_a != elo_b:
        return elo_a > elo_b
    return team_a < team_b


def sample_nested(coeffs_a: TeamCoefficients, coeffs_b: TeamCoefficients,
                  elo_a: float, elo_b: float, rng: np.random.Generator,
                  rate_scale: float = 1.0, size=None):
    """Draw the stronger team's goals first, then the weaker team's given them.

    The weaker team's goal rate is its own fitted regression on the stronger
    team's Elo and realized goals. ``rate_scale`` shrinks both rates (extra
    time uses 1/3).
    """
    a_stronger = _nested_orientation(coeffs_a.team, coeffs_b.team, elo_a, elo_b)
    if a_stronger:
        strong, weak = coeffs_a, coeffs_b
        elo_strong, elo_weak = elo_a, elo_b
    else:
        strong, weak = coeffs_b, coeffs_a
        elo_strong, elo_weak = elo_b, elo_a
    if weak.nested_gamma is None:
        raise CupsimError(f"no nested regression fitted for {weak.team}")
    g0, g1, g2 = weak.nested_gamma
    lam_strong = _clamp_rate(0.5 * (strong.mu(elo_weak) + weak.nu(elo_strong))) * rate_scale
    g_strong = rng.poisson(lam_strong, size=size)
    with np.errstate(over="ignore"):
        lam_weak = _clamp_rate(np.exp(g0 + g1 * elo_strong + g2 * g_strong)) * rate_scale
    g_weak = rng.poisson(lam_weak, size=size)
    if size is None:
        g_strong, g_weak = int(g_strong), int(g_weak)
    if a_stronger:
        return ScoreLine(g_strong, g_weak) if size is None else (g_strong, g_weak)
    return ScoreLine(g_weak, g_strong) if size is None else (g_weak, g_strong)


def _is_weaker_side(obs: dataio.TeamObservation, team: str) -> bool:
    if obs.opponent_elo != obs.own_elo:
        return obs.opponent_elo > obs.own_elo
    return obs.opponent < team


def fit_team(team: str, observations: list[dataio.TeamObservation],
             families=MODEL_FAMILIES) -> TeamCoefficients:
    """Fit the requested model families for one team from its observations."""
    coeffs = TeamCoefficients(team=team)
    triples = [(o.opponent_elo, o.goals_for, o.goals_against) for o in observations]

    def _attach_context(exc: Exception, family: str):
        raise FitError(f"{family} fit failed for {team}: {exc}") from exc

    if "independent" in families or "nested" in families:
        if len(triples) < MIN_OBS_INDEPENDENT:
            raise InsufficientDataError(team, len(triples), MIN_OBS_INDEPENDENT,
                                        context="independent model")
        try:
            attack = glm.fit_poisson([((e,), gf) for e, gf, _ in triples])
            defense = glm.fit_poisson([((e,), ga) for e, _, ga in triples])
        except FitError as exc:
            _attach_context(exc, "independent")
        coeffs.attack = (float(attack.coefficients[0]), float(attack.coefficients[1]))
        coeffs.defense = (float(defense.coefficients[0]), float(defense.coefficients[1]))

    if "bivariate" in families:
        if len(triples) < MIN_OBS_BIVARIATE:
            raise InsufficientDataError(team, len(triples), MIN_OBS_BIVARIATE,
                                        context="bivariate model")
        try:
            coeffs.bivariate = fit_bivpois_em(triples)
        except FitError as exc:
            _attach_context(exc, "bivariate")

    if "inflated" in families:
        if len(triples) < MIN_OBS_BIVARIATE:
            raise InsufficientDataError(team, len(triples), MIN_OBS_BIVARIATE,
                                        context="inflated model")
        try:
            inflated_fit, inflation, _ = fit_inflated_em(triples)
        except FitError as exc:
            _attach_context(exc, "inflated")
        coeffs.inflated_bivariate = inflated_fit
        coeffs.inflation = inflation

    if "nested" in families:
        weaker = [o for o in observations if _is_weaker_side(o, team)]
        if len(weaker) < MIN_OBS_NESTED:
            raise InsufficientDataError(team, len(weaker), MIN_OBS_NESTED,
                                        context="nested model, weaker-side matches")
        try:
            nested = glm.fit_poisson(
                [((o.opponent_elo, float(o.goals_against)), o.goals_for) for o in weaker])
        except FitError as exc:
            _attach_context(exc, "nested")
        coeffs.nested_gamma = tuple(float(c) for c in nested.coefficients)

    return coeffs


def fit_all_models(matches, participants, data_filter: dataio.DataFilter, elo,
                   families=MODEL_FAMILIES) -> dict[str, TeamCoefficients]:
    """Fit every requested family for every participant; deterministic."""
    out: dict[str, TeamCoefficients] = {}
    for team in participants:
        observations = dataio.oriented_observations(matches, team, data_filter, elo)
        out[team] = fit_team(team, observations, families=families)
    return out


class FamilySampler:
    """Match-score sampler for one model family over a coefficient map."""

    def __init__(self, coefficients: dict[str, TeamCoefficients], family: str):
        if family not in MODEL_FAMILIES:
            raise ValueError(f"unknown model family {family!r}")
        self.family = family
        self.coefficients = coefficients

    def _pair(self, team_a: str, team_b: str) -> tuple[TeamCoefficients, TeamCoefficients]:
        try:
            return self.coefficients[team_a], self.coefficients[team_b]
        except KeyError as exc:
            raise CupsimError(f"no fitted coefficients for {exc.args[0]!r}") from exc

    def sample(self, team_a: str, team_b: str, elo_a: float, elo_b: float,
               rng: np.random.Generator, rate_scale: float = 1.0) -> ScoreLine:
        ca, cb = self._pair(team_a, team_b)
        if self.family == "independent":
            rates = rates_independent(ca, cb, elo_a, elo_b)
            return ScoreLine(int(rng.poisson(rates.lambda_a_given_b * rate_scale)),
                             int(rng.poisson(rates.lambda_b_given_a * rate_scale)))
        if self.family == "nested":
            return sample_nested(ca, cb, elo_a, elo_b, rng, rate_scale=rate_scale)
        rates = rates_bivariate(ca, cb, elo_a, elo_b, inflated=self.family == "inflated")
        return sample_bivariate(rates.bivariate.scaled(rate_scale), rates.inflation, rng)

    def shootout_p(self, team_a: str, team_b: str, elo_a: float, elo_b: float) -> float:
        """P[A wins a penalty shootout]: proportional to the scoring rates."""
        ca, cb = self._pair(team_a, team_b)
        if self.family in ("bivariate", "inflated"):
            rates = rates_bivariate(ca, cb, elo_a, elo_b, inflated=self.family == "inflated")
            la, lb = rates.lambda_a_given_b, rates.lambda_b_given_a
        elif self.family == "nested":
            a_stronger = _nested_orientation(team_a, team_b, elo_a, elo_b)
            strong, weak = (ca, cb) if a_stronger else (cb, ca)
            elo_strong, elo_weak = (elo_a, elo_b) if a_stronger else (elo_b, elo_a)
            if weak.nested_gamma is None:
                raise CupsimError(f"no nested regression fitted for {weak.team}")
            g0, g1, g2 = weak.nested_gamma
            lam_strong = float(_clamp_rate(0.5 * (strong.mu(elo_weak) + weak.nu(elo_strong))))
            # Plug-in conditioning on the strong team's expected goals.
            exponent = min(g0 + g1 * elo_strong + g2 * lam_strong, 700.0)
            lam_weak = float(_clamp_rate(math.exp(exponent)))
            la, lb = (lam_strong, lam_weak) if a_stronger else (lam_weak, lam_strong)
        else:
            rates = rates_independent(ca, cb, elo_a, elo_b)
            la, lb = rates.lambda_a_given_b, rates.lambda_b_given_a
        return la / (la + lb)


def coefficients_to_json(coefficients: dict[str, TeamCoefficients]) -> str:
    """Serialize a coefficient map, round-trippable via coefficients_from_json."""

    def fit_dict(fit: BivariateTeamFit | None):
        if fit is None:
            return None
        return {
            "mu_coeffs": list(fit.mu_coeffs),
            "nu_coeffs": list(fit.nu_coeffs),
            "tau_coeff": fit.tau_coeff,
            "loglik": fit.loglik,
            "aic": fit.aic,
            "tau_at_bound": fit.tau_at_bound,
        }

    payload = {}
    for team in sorted(coefficients):
        c = coefficients[team]
        payload[team] = {
            "attack": list(c.attack) if c.attack else None,
            "defense": list(c.defense) if c.defense else None,
            "bivariate": fit_dict(c.bivariate),
            "inflated_bivariate": fit_dict(c.inflated_bivariate),
            "inflation": ({"p": c.inflation.p, "theta": list(c.inflation.theta)}
                          if c.inflation else None),
            "nested_gamma": list(c.nested_gamma) if c.nested_gamma else None,
        }
    return json.dumps(payload, indent=2, sort_keys=True)


def coefficients_from_json(text: str) -> dict[str, TeamCoefficients]:
    """Load a coefficient map without refitting."""

    def fit_from(d):
        if d is None:
            return None
        return BivariateTeamFit(
            mu_coeffs=tuple(d["mu_coeffs"]),
            nu_coeffs=tuple(d["nu_coeffs"]),
            tau_coeff=d["tau_coeff"],
            loglik=d["loglik"],
            aic=d["aic"],
            tau_at_bound=d["tau_at_bound"],
        )

    out = {}
    for team, d in json.loads(text).items():
        out[team] = TeamCoefficients(
            team=team,
            attack=tuple(d["attack"]) if d["attack"] else None,
            defense=tuple(d["defense"]) if d["defense"] else None,
            bivariate=fit_from(d["bivariate"]),
            inflated_bivariate=fit_from(d["inflated_bivariate"]),
            inflation=(DiagonalInflation(d["inflation"]["p"], tuple(d["inflation"]["theta"]))
                       if d["inflation"] else None),
            nested_gamma=tuple(d["nested_gamma"]) if d["nested_gamma"] else None,
        )
    return out
