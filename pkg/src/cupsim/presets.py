"""Bundled tournament presets: formats, Elo snapshots, data filters.

Each preset year carries the real group draw and knockout wiring, a
tournament-eve Elo snapshot, the historical data window used for fitting,
and the per-team filter adaptions (France's shortened window plus its home
EURO 2016 matches for 2018; Germany's home World Cup 2006 matches and
Slovenia's participants-only restriction for 2010). The 2010 and 2014
presets also ship the realized outcome codes used for validation scoring.
"""

from __future__ import annotations

import datetime as dt
import json
from importlib import resources

from cupsim.dataio import DataFilter, EloSnapshot, TeamOverride, load_elo_snapshot
from cupsim.scoring import RealizedResult
from cupsim.tournament import TournamentFormat

PRESET_YEARS = ("2010", "2014", "2018")

# Fitting windows per preset (historical data range, inclusive).
DATA_WINDOWS = {
    "2010": (dt.date(2000, 1, 1), dt.date(2010, 6, 10)),
    "2014": (dt.date(2002, 1, 1), dt.date(2014, 6, 11)),
    "2018": (dt.date(2010, 1, 1), dt.date(2017, 12, 31)),
}

EURO_2016_WINDOW = (dt.date(2016, 6, 10), dt.date(2016, 7, 10))
WORLD_CUP_2006_WINDOW = (dt.date(2006, 6, 9), dt.date(2006, 7, 9))


def _data_text(name: str) -> str:
    return resources.files("cupsim").joinpath("data", name).read_text(encoding="utf-8")


def bundled_matches_path():
    """Filesystem path of the bundled reconstructed match history."""
    return resources.files("cupsim").joinpath("data", "matches.csv")


def _check_year(year: str) -> str:
    year = str(year)
    if year not in PRESET_YEARS:
        raise ValueError(f"unknown preset {year!r}, available: {PRESET_YEARS}")
    return year


def load_format(year: str) -> TournamentFormat:
    return TournamentFormat.from_json(_data_text(f"format_{_check_year(year)}.json"))


def load_snapshot(year: str) -> EloSnapshot:
    with resources.as_file(
            resources.files("cupsim").joinpath("data", f"elo_{_check_year(year)}.csv")) as p:
        return load_elo_snapshot(p)


def load_realized(year: str) -> RealizedResult:
    year = _check_year(year)
    if year == "2018":
        raise ValueError("no realized results bundled for the 2018 preset")
    codes = json.loads(_data_text(f"realized_{year}.json"))
    return RealizedResult({team: int(code) for team, code in codes.items()})


def default_filter(year: str) -> DataFilter:
    year = _check_year(year)
    date_from, date_to = DATA_WINDOWS[year]
    overrides: dict[str, TeamOverride] = {}
    if year == "2018":
        overrides["France"] = TeamOverride(
            date_from=dt.date(2012, 1, 1),
            include_windows=(EURO_2016_WINDOW,),
        )
    if year == "2010":
        overrides["Germany"] = TeamOverride(include_windows=(WORLD_CUP_2006_WINDOW,))
        participants = frozenset(load_format(year).teams)
        overrides["Slovenia"] = TeamOverride(opponents_only=participants)
    return DataFilter(date_from=date_from, date_to=date_to,
                      venue_policy="neutral_only", team_overrides=overrides)
