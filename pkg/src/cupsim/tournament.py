"""World-Cup tournament state machine and the Monte Carlo engine.

A tournament format is eight ordered groups of four plus the leaf order of
the knockout tree (sixteen slot labels like ``1A`` or ``2B``). Group tables
follow the FIFA criteria minus fair play: points, goal difference, goals
scored, the same three restricted to the still-tied teams, then lots.

Replication ``i`` of a Monte Carlo run draws from a random stream seeded
with ``(seed, i)``, which makes results independent of how replications are
distributed over worker processes.
"""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from cupsim import elo as elo_mod
from cupsim.dataio import EloSnapshot
from cupsim.errors import CupsimError
from cupsim.matchmodels import FamilySampler, ScoreLine, TeamCoefficients

# Outcome codes: 1 champion, 2 lost final, 3 out in semifinal, 4 out in
# quarterfinal, 5 out in round of 16, 6 out in the group stage.
N_OUTCOMES = 6

# Fixed intra-group fixture order (indices into the 4-team group list).
GROUP_MATCH_ORDER = ((0, 1), (2, 3), (0, 2), (3, 1), (3, 0), (1, 2))

STAGE_GROUP = "group"
STAGE_R16 = "round_of_16"
STAGE_QF = "quarterfinal"
STAGE_SF = "semifinal"
STAGE_THIRD = "third_place"
STAGE_FINAL = "final"

EXTRA_TIME_SCALE = 1.0 / 3.0


@dataclass
class TournamentFormat:
    name: str
    groups: list[list[str]]
    bracket_slots: list[str]

    def __post_init__(self):
        if len(self.groups) != 8 or any(len(g) != 4 for g in self.groups):
            raise ValueError("format needs 8 groups of 4 teams")
        teams = [t for g in self.groups for t in g]
        if len(set(teams)) != 32:
            raise ValueError("format needs 32 distinct teams")
        expected_slots = {f"{rank}{chr(ord('A') + gi)}"
                          for rank in (1, 2) for gi in range(len(self.groups))}
        if len(self.bracket_slots) != 16 or set(self.bracket_slots) != expected_slots:
            raise ValueError("bracket must reference each group winner and runner-up once")

    @property
    def teams(self) -> list[str]:
        return [t for g in self.groups for t in g]

    @classmethod
    def from_json(cls, text: str) -> "TournamentFormat":
        raw = json.loads(text)
        return cls(name=raw["name"], groups=raw["groups"],
                   bracket_slots=raw["bracket_slots"])

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "groups": self.groups,
                           "bracket_slots": self.bracket_slots}, indent=2)


@dataclass
class GroupTable:
    """Points / goal difference / goals scored bookkeeping for one group."""

    teams: list[str]
    points: dict[str, int] = field(default_factory=dict)
    goals_for: dict[str, int] = field(default_factory=dict)
    goals_against: dict[str, int] = field(default_factory=dict)
    results: list[tuple[str, str, int, int]] = field(default_factory=list)

    def __post_init__(self):
        for t in self.teams:
            self.points.setdefault(t, 0)
            self.goals_for.setdefault(t, 0)
            self.goals_against.setdefault(t, 0)

    def record(self, team_a: str, team_b: str, score: ScoreLine) -> None:
        self.results.append((team_a, team_b, score.goals_a, score.goals_b))
        self.goals_for[team_a] += score.goals_a
        self.goals_against[team_a] += score.goals_b
        self.goals_for[team_b] += score.goals_b
        self.goals_against[team_b] += score.goals_a
        if score.goals_a > score.goals_b:
            self.points[team_a] += 3
        elif score.goals_a < score.goals_b:
            self.points[team_b] += 3
        else:
            self.points[team_a] += 1
            self.points[team_b] += 1

    def key(self, team: str) -> tuple[int, int, int]:
        return (self.points[team],
                self.goals_for[team] - self.goals_against[team],
                self.goals_for[team])

    def restricted_key(self, team: str, tied: set[str]) -> tuple[int, int, int]:
        points = gf = ga = 0
        for a, b, sa, sb in self.results:
            if a == team and b in tied:
                gf += sa
                ga += sb
                points += 3 if sa > sb else (1 if sa == sb else 0)
            elif b == team and a in tied:
                gf += sb
                ga += sa
                points += 3 if sb > sa else (1 if sa == sb else 0)
        return (points, gf - ga, gf)


@dataclass
class MatchOutcome:
    stage: str
    team_a: str
    team_b: str
    score: ScoreLine
    winner: str | None
    went_to_penalties: bool = False


@dataclass
class StageDistribution:
    """Per-team empirical distribution over the six ordinal outcomes."""

    outcome_counts: dict[str, np.ndarray]
    n: int
    seed: int | None = None

    def probabilities(self, team: str) -> np.ndarray:
        return self.outcome_counts[team] / self.n

    def reach_probabilities(self, team: str) -> np.ndarray:
        """Cumulative chain: champion, final, semi, quarter, R16 reached."""
        p = self.probabilities(team)
        return np.cumsum(p[:5])

    @property
    def teams(self) -> list[str]:
        return list(self.outcome_counts)


def rank_group(table: GroupTable, rng: np.random.Generator) -> list[str]:
    """Order a finished group by the FIFA criteria (minus fair play).

    Ties after points/goal difference/goals scored are re-ranked by the same
    three criteria restricted to matches among the tied teams; anything still
    tied is ordered by lots drawn from the replication's random stream.
    """
    order = sorted(table.teams, key=lambda t: table.key(t), reverse=True)
    ranked: list[str] = []
    i = 0
    while i < len(order):
        tied = [t for t in order if table.key(t) == table.key(order[i])]
        i += len(tied)
        if len(tied) == 1:
            ranked.extend(tied)
            continue
        tied_set = set(tied)
        sub = sorted(tied, key=lambda t: table.restricted_key(t, tied_set), reverse=True)
        j = 0
        while j < len(sub):
            still = [t for t in sub
                     if table.restricted_key(t, tied_set) == table.restricted_key(sub[j], tied_set)]
            j += len(still)
            if len(still) > 1:
                still = [still[k] for k in rng.permutation(len(still))]
            ranked.extend(still)
    return ranked


def play_group_match(sampler, team_a: str, team_b: str, table: elo_mod.EloTable,
                     rng: np.random.Generator, update_elo: bool = True) -> ScoreLine:
    score = sampler.sample(team_a, team_b, table[team_a], table[team_b], rng)
    if update_elo:
        elo_mod.update(table, team_a, team_b, score)
    return score


def play_knockout_match(sampler, team_a: str, team_b: str, table: elo_mod.EloTable,
                        rng: np.random.Generator,
                        update_elo: bool = True) -> MatchOutcome:
    """Play one knockout tie: 90 minutes, extra time at one third of the
    rates, then a penalty shootout with win probability proportional to the
    two scoring rates. Elo is updated from the final recorded score (the
    120-minute score when extra time was played, a draw when penalties
    decided the tie)."""
    elo_a, elo_b = table[team_a], table[team_b]
    score = sampler.sample(team_a, team_b, elo_a, elo_b, rng)
    went_to_pens = False
    if score.goals_a == score.goals_b:
        extra = sampler.sample(team_a, team_b, elo_a, elo_b, rng,
                               rate_scale=EXTRA_TIME_SCALE)
        score = ScoreLine(score.goals_a + extra.goals_a, score.goals_b + extra.goals_b)
    if score.goals_a > score.goals_b:
        winner = team_a
    elif score.goals_a < score.goals_b:
        winner = team_b
    else:
        went_to_pens = True
        p_a = sampler.shootout_p(team_a, team_b, elo_a, elo_b)
        winner = team_a if rng.random() < p_a else team_b
    if update_elo:
        elo_mod.update(table, team_a, team_b, score)
    return MatchOutcome(STAGE_R16, team_a, team_b, score, winner, went_to_pens)


def simulate_tournament(fmt: TournamentFormat, sampler, elo_snapshot: EloSnapshot,
                        rng: np.random.Generator, k_factor: float = elo_mod.WORLD_CUP_K,
                        update_elo: bool = True,
                        record: list[MatchOutcome] | None = None,
                        table: elo_mod.EloTable | None = None) -> dict[str, int]:
    """Run one full tournament; returns the outcome code (1..6) per team.

    The Elo table starts from a fresh copy of the snapshot and is updated
    after every match. Pass ``record`` to collect each match played, or
    ``table`` to supply (and inspect) the working rating table.
    """
    for team in fmt.teams:
        if team not in elo_snapshot:
            raise CupsimError(f"no Elo rating for participant {team!r}")
    if table is None:
        table = elo_mod.EloTable({t: elo_snapshot[t] for t in fmt.teams}, k_factor)
    codes: dict[str, int] = {}

    slot_teams: dict[str, str] = {}
    for gi, group in enumerate(fmt.groups):
        gtable = GroupTable(teams=list(group))
        for ia, ib in GROUP_MATCH_ORDER:
            team_a, team_b = group[ia], group[ib]
            score = play_group_match(sampler, team_a, team_b, table, rng, update_elo)
            gtable.record(team_a, team_b, score)
            if record is not None:
                winner = (team_a if score.goals_a > score.goals_b
                          else team_b if score.goals_b > score.goals_a else None)
                record.append(MatchOutcome(STAGE_GROUP, team_a, team_b, score, winner))
        ranking = rank_group(gtable, rng)
        letter = chr(ord("A") + gi)
        slot_teams[f"1{letter}"] = ranking[0]
        slot_teams[f"2{letter}"] = ranking[1]
        codes[ranking[2]] = 6
        codes[ranking[3]] = 6

    def run_round(entrants: list[str], stage: str, loser_code: int) -> list[str]:
        winners = []
        for k in range(0, len(entrants), 2):
            team_a, team_b = entrants[k], entrants[k + 1]
            outcome = play_knockout_match(sampler, team_a, team_b, table, rng, update_elo)
            outcome.stage = stage
            if record is not None:
                record.append(outcome)
            loser = team_b if outcome.winner == team_a else team_a
            codes[loser] = loser_code
            winners.append(outcome.winner)
        return winners

    r16 = [slot_teams[slot] for slot in fmt.bracket_slots]
    quarter = run_round(r16, STAGE_R16, 5)
    semi = run_round(quarter, STAGE_QF, 4)
    finalists = run_round(semi, STAGE_SF, 3)

    # Third place: played for fidelity, but both semifinal losers keep code 3.
    third_pair = [t for t in semi if t not in finalists]
    third = play_knockout_match(sampler, third_pair[0], third_pair[1], table, rng, update_elo)
    third.stage = STAGE_THIRD
    if record is not None:
        record.append(third)

    final = play_knockout_match(sampler, finalists[0], finalists[1], table, rng, update_elo)
    final.stage = STAGE_FINAL
    if record is not None:
        record.append(final)
    runner_up = finalists[1] if final.winner == finalists[0] else finalists[0]
    codes[final.winner] = 1
    codes[runner_up] = 2
    return codes


def _replication_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def _count_block(fmt: TournamentFormat, sampler, elo_snapshot: EloSnapshot,
                 k_factor: float, update_elo: bool, seed: int,
                 start: int, stop: int) -> np.ndarray:
    teams = fmt.teams
    index = {t: i for i, t in enumerate(teams)}
    counts = np.zeros((len(teams), N_OUTCOMES), dtype=np.int64)
    for i in range(start, stop):
        codes = simulate_tournament(fmt, sampler, elo_snapshot,
                                    _replication_rng(seed, i), k_factor, update_elo)
        for team, code in codes.items():
            counts[index[team], code - 1] += 1
    return counts


def _worker(args) -> np.ndarray:
    return _count_block(*args)


def monte_carlo(fmt: TournamentFormat, coefficients: dict[str, TeamCoefficients],
                family: str, elo_snapshot: EloSnapshot, n: int, seed: int,
                k_factor: float = elo_mod.WORLD_CUP_K, update_elo: bool = True,
                workers: int = 1) -> StageDistribution:
    """Estimate the stage distribution from n independent replications.

    The result is invariant to ``workers``: replication i always uses the
    stream seeded with (seed, i).
    """
    sampler = FamilySampler(coefficients, family)
    return monte_carlo_sampler(fmt, sampler, elo_snapshot, n, seed,
                               k_factor=k_factor, update_elo=update_elo,
                               workers=workers)


def monte_carlo_sampler(fmt: TournamentFormat, sampler, elo_snapshot: EloSnapshot,
                        n: int, seed: int, k_factor: float = elo_mod.WORLD_CUP_K,
                        update_elo: bool = True, workers: int = 1) -> StageDistribution:
    if n < 1:
        raise ValueError("need at least one replication")
    workers = max(1, min(workers, n))
    if workers == 1:
        counts = _count_block(fmt, sampler, elo_snapshot, k_factor, update_elo,
                              seed, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        jobs = [(fmt, sampler, elo_snapshot, k_factor, update_elo, seed,
                 int(bounds[w]), int(bounds[w + 1])) for w in range(workers)]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=workers) as pool:
            counts = sum(pool.map(_worker, jobs))
    teams = fmt.teams
    return StageDistribution(
        outcome_counts={t: counts[i] for i, t in enumerate(teams)},
        n=n, seed=seed)
