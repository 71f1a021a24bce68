"""Ingestion and filtering of historical match data and Elo snapshots.

Match CSV schema: header ``date,team1,team2,goals1,goals2,venue`` with ISO
dates, venue codes N/H1/H2 and optional trailing ``elo1,elo2`` columns.
Elo CSV schema: header ``team,rating``. Lines starting with ``#`` are
metadata comments and are skipped.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from cupsim.errors import DataError, InsufficientDataError

# Successor-team merges applied at load time; extend via the aliases
# argument of load_matches.
DEFAULT_ALIASES = {
    "Yugoslavia": "Serbia",
    "Serbia and Montenegro": "Serbia",
}


class Venue(Enum):
    NEUTRAL = "N"
    HOME_OF_FIRST = "H1"
    HOME_OF_SECOND = "H2"


@dataclass
class MatchRecord:
    date: dt.date
    home_team: str
    away_team: str
    home_goals: int
    away_goals: int
    venue: Venue
    elo_home_at_match: float | None = None
    elo_away_at_match: float | None = None

    def __post_init__(self):
        if self.home_goals < 0 or self.away_goals < 0:
            raise ValueError("goals must be non-negative")
        if self.home_team == self.away_team:
            raise ValueError(f"a team cannot play itself: {self.home_team}")


@dataclass
class EloSnapshot:
    ratings: dict[str, float]
    as_of: dt.date | None = None

    def __post_init__(self):
        for team, rating in self.ratings.items():
            if not (math.isfinite(rating) and rating > 0):
                raise ValueError(f"rating for {team} must be finite and positive")

    def __getitem__(self, team: str) -> float:
        return self.ratings[team]

    def __contains__(self, team: str) -> bool:
        return team in self.ratings


@dataclass
class TeamOverride:
    """Per-team relaxations of the global filter.

    ``date_from`` replaces the global window start. ``include_windows`` are
    date ranges inside which the venue policy is relaxed to all venues (used
    to pull in home-tournament matches). ``opponents_only`` restricts
    retained matches to the given opponents.
    """

    date_from: dt.date | None = None
    include_windows: tuple[tuple[dt.date, dt.date], ...] = ()
    opponents_only: frozenset[str] | None = None


@dataclass
class DataFilter:
    date_from: dt.date
    date_to: dt.date
    venue_policy: str = "neutral_only"
    team_overrides: dict[str, TeamOverride] = field(default_factory=dict)

    def __post_init__(self):
        if self.date_from >= self.date_to:
            raise ValueError("date_from must precede date_to")
        if self.venue_policy not in ("neutral_only", "all"):
            raise ValueError(f"unknown venue policy {self.venue_policy!r}")


@dataclass
class TeamObservation:
    """One retained match seen from a single team's viewpoint."""

    date: dt.date
    opponent: str
    opponent_elo: float
    own_elo: float
    goals_for: int
    goals_against: int


MATCH_HEADER = ["date", "team1", "team2", "goals1", "goals2", "venue"]


def _parse_int(value: str, line: int, fieldname: str) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise DataError(f"not an integer: {value!r}", line=line, field=fieldname) from None
    if parsed < 0:
        raise DataError(f"negative goal count {parsed}", line=line, field=fieldname)
    return parsed


def _parse_date(value: str, line: int) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise DataError(f"invalid date {value!r}", line=line, field="date") from None


def load_matches(path, aliases: Mapping[str, str] | None = None) -> list[MatchRecord]:
    """Read a match CSV, preserving file order and normalizing team aliases."""
    alias_map = dict(DEFAULT_ALIASES if aliases is None else aliases)
    path = Path(path)
    records: list[MatchRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header: list[str] | None = None
        for line_no, row in enumerate(reader, start=1):
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                if header[: len(MATCH_HEADER)] != MATCH_HEADER:
                    raise DataError(
                        f"unexpected header {header!r}, want {MATCH_HEADER!r} "
                        "(optionally followed by elo1,elo2)", line=line_no)
                has_elo = header[len(MATCH_HEADER):] == ["elo1", "elo2"]
                if not has_elo and len(header) != len(MATCH_HEADER):
                    raise DataError(f"unexpected trailing columns in header {header!r}",
                                    line=line_no)
                continue
            expected = len(MATCH_HEADER) + (2 if has_elo else 0)
            if len(row) != expected:
                raise DataError(f"expected {expected} fields, got {len(row)}", line=line_no)
            date = _parse_date(row[0].strip(), line_no)
            team1 = alias_map.get(row[1].strip(), row[1].strip())
            team2 = alias_map.get(row[2].strip(), row[2].strip())
            goals1 = _parse_int(row[3].strip(), line_no, "goals1")
            goals2 = _parse_int(row[4].strip(), line_no, "goals2")
            venue_code = row[5].strip()
            try:
                venue = Venue(venue_code)
            except ValueError:
                raise DataError(f"unknown venue code {venue_code!r}",
                                line=line_no, field="venue") from None
            elo1 = elo2 = None
            if has_elo:
                try:
                    elo1 = float(row[6]) if row[6].strip() else None
                    elo2 = float(row[7]) if row[7].strip() else None
                except ValueError:
                    raise DataError("non-numeric Elo value", line=line_no, field="elo") from None
            if not team1 or not team2:
                raise DataError("empty team name", line=line_no, field="team")
            try:
                record = MatchRecord(date, team1, team2, goals1, goals2, venue, elo1, elo2)
            except ValueError as exc:
                raise DataError(str(exc), line=line_no) from None
            records.append(record)
    if header is None:
        raise DataError(f"{path}: empty file, missing header")
    return records


def load_elo_snapshot(path) -> EloSnapshot:
    """Read a ``team,rating`` CSV into a snapshot; duplicates are an error."""
    path = Path(path)
    ratings: dict[str, float] = {}
    as_of: dt.date | None = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = None
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if row[0].startswith("#"):
                text = ",".join(row).lstrip("#").strip()
                if text.startswith("as_of"):
                    as_of = dt.date.fromisoformat(text.split("=", 1)[1].strip())
                continue
            if header is None:
                header = [c.strip() for c in row]
                if header != ["team", "rating"]:
                    raise DataError(f"unexpected header {header!r}, want ['team', 'rating']",
                                    line=line_no)
                continue
            if len(row) != 2:
                raise DataError(f"expected 2 fields, got {len(row)}", line=line_no)
            team = row[0].strip()
            if team in ratings:
                raise DataError(f"duplicate team {team!r}", line=line_no)
            try:
                rating = float(row[1])
            except ValueError:
                raise DataError(f"non-numeric rating {row[1]!r}",
                                line=line_no, field="rating") from None
            if not rating > 0:
                raise DataError(f"rating must be positive, got {rating}",
                                line=line_no, field="rating")
            ratings[team] = rating
    if not ratings:
        raise DataError(f"{path}: no participants")
    return EloSnapshot(ratings=ratings, as_of=as_of)


def _rating_of(lookup, team: str) -> float | None:
    if isinstance(lookup, EloSnapshot):
        return lookup.ratings.get(team)
    if isinstance(lookup, Mapping):
        return lookup.get(team)
    return lookup(team)


def _in_window(date: dt.date, windows) -> bool:
    return any(lo <= date <= hi for lo, hi in windows)


def oriented_observations(matches: list[MatchRecord], team: str,
                          data_filter: DataFilter, elo) -> list[TeamObservation]:
    """All retained matches of ``team``, oriented from its viewpoint.

    Per-match Elo columns take precedence; the ``elo`` lookup (snapshot,
    mapping or callable) is the fallback. Raises InsufficientDataError when
    nothing is retained and DataError when an opponent rating cannot be
    resolved.
    """
    override = data_filter.team_overrides.get(team, TeamOverride())
    date_from = override.date_from or data_filter.date_from
    out: list[TeamObservation] = []
    for rec in matches:
        if team == rec.home_team:
            opponent = rec.away_team
            goals_for, goals_against = rec.home_goals, rec.away_goals
            opp_elo, own_elo = rec.elo_away_at_match, rec.elo_home_at_match
        elif team == rec.away_team:
            opponent = rec.home_team
            goals_for, goals_against = rec.away_goals, rec.home_goals
            opp_elo, own_elo = rec.elo_home_at_match, rec.elo_away_at_match
        else:
            continue
        if not (date_from <= rec.date <= data_filter.date_to):
            if not (_in_window(rec.date, override.include_windows)
                    and data_filter.date_from <= rec.date <= data_filter.date_to):
                continue
        if data_filter.venue_policy == "neutral_only" and rec.venue is not Venue.NEUTRAL:
            if not _in_window(rec.date, override.include_windows):
                continue
        if override.opponents_only is not None and opponent not in override.opponents_only:
            continue
        if opp_elo is None:
            opp_elo = _rating_of(elo, opponent)
        if opp_elo is None:
            raise DataError(f"no Elo rating for opponent {opponent!r} "
                            f"of {team} on {rec.date.isoformat()}")
        if own_elo is None:
            own_elo = _rating_of(elo, team)
        if own_elo is None:
            raise DataError(f"no Elo rating for {team!r} on {rec.date.isoformat()}")
        out.append(TeamObservation(
            date=rec.date, opponent=opponent, opponent_elo=float(opp_elo),
            own_elo=float(own_elo), goals_for=goals_for, goals_against=goals_against))
    if not out:
        raise InsufficientDataError(team, 0, 1, context="no matches retained by filter")
    return out


def observations_for_team(matches: list[MatchRecord], team: str,
                          data_filter: DataFilter, elo) -> list[tuple[float, int, int]]:
    """Regression observations (opponent_elo, goals_for, goals_against) for one team."""
    return [(o.opponent_elo, o.goals_for, o.goals_against)
            for o in oriented_observations(matches, team, data_filter, elo)]
