"""Ordinal outcome coding of a finished cup and the four forecast scores.

Outcome codes run from 1 (champion) to 6 (out in the group stage). Each
score function takes a forecast distribution over the six codes per team
and the realized codes, and returns the total together with the per-team
breakdown.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from cupsim.errors import CupsimError
from cupsim.tournament import (
    STAGE_FINAL,
    STAGE_GROUP,
    STAGE_QF,
    STAGE_R16,
    STAGE_SF,
    MatchOutcome,
    StageDistribution,
)

# Code multiset of a 32-team cup: one champion, one finalist, two semifinal
# losers, four quarterfinal losers, eight R16 losers, sixteen group exits.
EXPECTED_CODE_COUNTS = {1: 1, 2: 1, 3: 2, 4: 4, 5: 8, 6: 16}


@dataclass
class RealizedResult:
    codes: dict[str, int]

    def __post_init__(self):
        counts = Counter(self.codes.values())
        if counts != Counter(EXPECTED_CODE_COUNTS):
            raise ValueError(f"invalid outcome code multiset: {dict(counts)}")

    def __getitem__(self, team: str) -> int:
        return self.codes[team]


@dataclass
class ScoreReport:
    e1: float
    e2: float
    brier: float
    rps: float
    per_team_e1: dict[str, float]
    per_team_e2: dict[str, float]
    per_team_brier: dict[str, float]
    per_team_rps: dict[str, float]


def _probs(dist, team: str) -> np.ndarray:
    if isinstance(dist, StageDistribution):
        p = dist.probabilities(team)
    elif isinstance(dist, Mapping):
        p = np.asarray(dist[team], dtype=float)
    else:
        raise TypeError(f"unsupported distribution container {type(dist)!r}")
    if p.shape != (6,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"forecast for {team} is not a distribution over six outcomes")
    return p


def _teams(dist, real: RealizedResult) -> list[str]:
    teams = sorted(real.codes)
    for team in teams:
        _probs(dist, team)
    return teams


def score_e1(dist, real: RealizedResult) -> tuple[float, dict[str, float]]:
    """Distance between the realized code and the forecast mode.

    Argmax ties break toward the smaller (better) outcome code.
    """
    per_team = {}
    for team in _teams(dist, real):
        mode = int(np.argmax(_probs(dist, team))) + 1
        per_team[team] = float(abs(real[team] - mode))
    return sum(per_team.values()), per_team


def score_e2(dist, real: RealizedResult) -> tuple[float, dict[str, float]]:
    """Probability-weighted absolute distance to the realized code."""
    per_team = {}
    for team in _teams(dist, real):
        p = _probs(dist, team)
        per_team[team] = float(sum(p[j] * abs((j + 1) - real[team]) for j in range(6)))
    return sum(per_team.values()), per_team


def score_brier(dist, real: RealizedResult) -> tuple[float, dict[str, float]]:
    """Squared distance between the forecast vector and the outcome indicator."""
    per_team = {}
    for team in _teams(dist, real):
        p = _probs(dist, team)
        indicator = np.zeros(6)
        indicator[real[team] - 1] = 1.0
        per_team[team] = float(np.sum((p - indicator) ** 2))
    return sum(per_team.values()), per_team


def score_rps(dist, real: RealizedResult,
              literal_indicator: bool = False) -> tuple[float, dict[str, float]]:
    """Ranked probability score over the ordered outcome codes.

    The default compares cumulative forecast with cumulative outcome. With
    ``literal_indicator`` the non-cumulated outcome indicator is used inside
    the square instead (an alternative reading of the definition).
    """
    per_team = {}
    for team in _teams(dist, real):
        p = _probs(dist, team)
        cum_p = np.cumsum(p)
        total = 0.0
        for i in range(5):
            if literal_indicator:
                o = 1.0 if real[team] == i + 1 else 0.0
            else:
                o = 1.0 if real[team] <= i + 1 else 0.0
            total += (cum_p[i] - o) ** 2
        per_team[team] = total / 5.0
    return sum(per_team.values()), per_team


def score_report(dist, real: RealizedResult, literal_rps: bool = False) -> ScoreReport:
    e1, pt1 = score_e1(dist, real)
    e2, pt2 = score_e2(dist, real)
    brier, pt3 = score_brier(dist, real)
    rps, pt4 = score_rps(dist, real, literal_indicator=literal_rps)
    return ScoreReport(e1=e1, e2=e2, brier=brier, rps=rps,
                       per_team_e1=pt1, per_team_e2=pt2,
                       per_team_brier=pt3, per_team_rps=pt4)


def realized_results(history: list[MatchOutcome]) -> RealizedResult:
    """Derive the outcome codes from a complete tournament match record."""
    by_stage: dict[str, set[str]] = {}
    finals = [m for m in history if m.stage == STAGE_FINAL]
    for match in history:
        by_stage.setdefault(match.stage, set()).update((match.team_a, match.team_b))
    expected_matches = {STAGE_GROUP: 48, STAGE_R16: 8, STAGE_QF: 4,
                        STAGE_SF: 2, STAGE_FINAL: 1}
    for stage, want in expected_matches.items():
        have = sum(1 for m in history if m.stage == stage)
        if have != want:
            raise CupsimError(
                f"incomplete tournament record: {have} {stage} matches, expected {want}")
    final = finals[0]
    if final.winner is None:
        raise CupsimError("incomplete tournament record: final has no winner")
    codes: dict[str, int] = {}
    for team in by_stage[STAGE_GROUP]:
        codes[team] = 6
    for team in by_stage[STAGE_R16]:
        codes[team] = 5
    for team in by_stage[STAGE_QF]:
        codes[team] = 4
    for team in by_stage[STAGE_SF]:
        codes[team] = 3
    codes[final.team_a] = 2
    codes[final.team_b] = 2
    codes[final.winner] = 1
    return RealizedResult(codes)
