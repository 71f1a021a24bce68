"""CSV/JSON report emission: probability tables, score tables, diagnostics.

All writers are deterministic for fixed inputs; randomized outputs carry
their seed and replication count in ``#``-prefixed metadata header lines.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from cupsim import glm
from cupsim.scoring import ScoreReport
from cupsim.tournament import StageDistribution

STAGE_COLUMNS = ("champion", "final", "semi", "quarter", "r16", "prelim_round")


def probabilities_map(dist) -> dict[str, np.ndarray]:
    if isinstance(dist, StageDistribution):
        return {team: dist.probabilities(team) for team in dist.teams}
    return {team: np.asarray(p, dtype=float) for team, p in dist.items()}


def _metadata_lines(metadata: dict | None) -> list[str]:
    if not metadata:
        return []
    body = ", ".join(f"{k}={metadata[k]}" for k in sorted(metadata))
    return [f"# {body}"]


def _ordered_teams(probs: dict[str, np.ndarray]) -> list[str]:
    # Champion probability first, then the full reach chain, then the name.
    return sorted(probs, key=lambda t: (-probs[t][0], -np.cumsum(probs[t][:5])[-1], t))


def stage_probability_rows(probs: dict[str, np.ndarray]) -> list[tuple]:
    """Cumulative reach probabilities per team (champion .. R16) plus the
    group-exit probability, in percent."""
    rows = []
    for team in _ordered_teams(probs):
        p = probs[team]
        reach = np.cumsum(p[:5])
        rows.append((team, reach[0], reach[1], reach[2], reach[3], reach[4], p[5]))
    return rows


def write_stage_probability_csv(path, dist, metadata: dict | None = None) -> None:
    """Forecast table in percent: cumulative columns, group exit last."""
    probs = probabilities_map(dist)
    lines = _metadata_lines(metadata)
    lines.append("team," + ",".join(STAGE_COLUMNS))
    for row in stage_probability_rows(probs):
        team, *values = row
        lines.append(team + "," + ",".join(f"{100.0 * v:.2f}" for v in values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_outcome_probability_csv(path, dist, metadata: dict | None = None) -> None:
    """Exclusive outcome-code distribution per team, full precision."""
    probs = probabilities_map(dist)
    lines = _metadata_lines(metadata)
    lines.append("team,p_champion,p_lost_final,p_out_semi,p_out_quarter,p_out_r16,p_out_group")
    for team in _ordered_teams(probs):
        p = probs[team]
        lines.append(team + "," + ",".join(f"{v:.10f}" for v in p))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_outcome_probability_csv(path) -> tuple[dict[str, np.ndarray], dict]:
    """Inverse of write_outcome_probability_csv; returns (probs, metadata)."""
    probs: dict[str, np.ndarray] = {}
    metadata: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for chunk in line.lstrip("#").split(","):
                if "=" in chunk:
                    key, value = chunk.split("=", 1)
                    metadata[key.strip()] = value.strip()
            continue
        if line.startswith("team,"):
            continue
        cells = line.split(",")
        probs[cells[0]] = np.array([float(c) for c in cells[1:7]])
    return probs, metadata


def write_score_csv(path, reports: dict[str, ScoreReport],
                    metadata: dict | None = None) -> None:
    """Model-comparison table: one row per family, E1/E2/Brier/RPS columns."""
    lines = _metadata_lines(metadata)
    lines.append("model,e1,e2,brier,rps")
    for family, report in reports.items():
        lines.append(f"{family},{report.e1:.4f},{report.e2:.4f},"
                     f"{report.brier:.4f},{report.rps:.4f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _regression_diagnostics(observations, response: str) -> dict:
    pairs = [((obs.opponent_elo,), getattr(obs, response)) for obs in observations]
    fit = glm.fit_poisson(pairs)
    dev = glm.deviance_report(fit, pairs)
    gof = glm.gof_chi_square(fit, pairs)
    return {
        "coefficients": [float(c) for c in fit.coefficients],
        "std_errors": [float(s) for s in fit.std_errors],
        "loglik": fit.loglik,
        "aic": fit.aic,
        "n_obs": fit.n_obs,
        "null_deviance": dev.null_deviance,
        "residual_deviance": dev.residual_deviance,
        "df_residual": dev.df_residual,
        "deviance_p_value": dev.p_value,
        "chi_statistic": gof.chi_statistic,
        "chi_df": gof.df,
        "chi_p_value": gof.p_value,
    }


def diagnostics_record(team: str, observations, coefficients=None) -> dict:
    """Per-team numeric diagnostics: the goals-for and goals-against
    regressions with deviances, p-values and the chi-square fit statistic."""
    record = {
        "team": team,
        "n_matches": len(observations),
        "attack": _regression_diagnostics(observations, "goals_for"),
        "defense": _regression_diagnostics(observations, "goals_against"),
    }
    if coefficients is not None:
        if coefficients.bivariate is not None:
            record["bivariate"] = {
                "tau": coefficients.bivariate.tau,
                "loglik": coefficients.bivariate.loglik,
                "aic": coefficients.bivariate.aic,
            }
        if coefficients.inflation is not None and coefficients.inflated_bivariate is not None:
            record["inflated"] = {
                "p": coefficients.inflation.p,
                "theta": list(coefficients.inflation.theta),
                "aic": coefficients.inflated_bivariate.aic,
            }
        if coefficients.nested_gamma is not None:
            record["nested"] = {"gamma": list(coefficients.nested_gamma)}
    return record


def write_diagnostics_json(path, records: list[dict]) -> None:
    Path(path).write_text(
        json.dumps(sorted(records, key=lambda r: r["team"]), indent=2) + "\n",
        encoding="utf-8")
