"""World-football Elo expectancy and post-match rating updates.

Uses the eloratings.net convention: 400-point logistic expectancy, a
goal-difference multiplier and K = 60 for World Cup finals matches.

Ratings and deltas are quantized to multiples of 2**-20 rating points
(about 1e-6). On that binary grid every table update is exact floating
point arithmetic, so the sum of all ratings is conserved bit-for-bit
across arbitrarily many updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from cupsim.matchmodels import ScoreLine

WORLD_CUP_K = 60.0

_GRID = float(1 << 20)


def _quantize(x: float) -> float:
    return round(x * _GRID) / _GRID


@dataclass
class EloTable:
    """Mutable rating table used inside a single simulated tournament."""

    ratings: dict[str, float]
    k_factor: float = WORLD_CUP_K

    def __post_init__(self):
        if self.k_factor <= 0:
            raise ValueError("k_factor must be positive")
        self.ratings = {team: _quantize(r) for team, r in self.ratings.items()}

    def __getitem__(self, team: str) -> float:
        return self.ratings[team]

    def copy(self) -> "EloTable":
        return EloTable(dict(self.ratings), self.k_factor)


def expectancy(rating_a: float, rating_b: float) -> float:
    """Expected score of the first team on the 400-point logistic scale."""
    return 1.0 / (10.0 ** (-(rating_a - rating_b) / 400.0) + 1.0)


def goal_multiplier(margin: int) -> float:
    """Goal-difference weight: 1 up to one goal, 1.5 for two, (11+m)/8 beyond."""
    margin = abs(margin)
    if margin <= 1:
        return 1.0
    if margin == 2:
        return 1.5
    return (11.0 + margin) / 8.0


def update(table: EloTable, team_a: str, team_b: str, score: "ScoreLine") -> tuple[float, float]:
    """Apply one match result to the table; returns (delta_a, delta_b).

    delta_b is the exact negation of delta_a, so the table total is
    preserved bit-for-bit.
    """
    for team in (team_a, team_b):
        if team not in table.ratings:
            raise KeyError(f"unknown team {team!r}")
    if score.goals_a > score.goals_b:
        actual = 1.0
    elif score.goals_a < score.goals_b:
        actual = 0.0
    else:
        actual = 0.5
    expected = expectancy(table.ratings[team_a], table.ratings[team_b])
    margin = abs(score.goals_a - score.goals_b)
    delta = _quantize(table.k_factor * goal_multiplier(margin) * (actual - expected))
    table.ratings[team_a] += delta
    table.ratings[team_b] -= delta
    return delta, -delta
