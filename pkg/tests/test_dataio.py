import datetime as dt

import pytest

from cupsim import dataio
from cupsim.dataio import (
    DataFilter,
    EloSnapshot,
    TeamOverride,
    Venue,
    load_elo_snapshot,
    load_matches,
    observations_for_team,
    oriented_observations,
)
from cupsim.errors import DataError, InsufficientDataError


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


MATCH_HEADER = "date,team1,team2,goals1,goals2,venue\n"


class TestLoadMatches:
    def test_single_row(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER + "2014-06-13,Spain,Netherlands,1,5,N\n")
        records = load_matches(p)
        assert len(records) == 1
        rec = records[0]
        assert rec.home_team == "Spain"
        assert rec.away_team == "Netherlands"
        assert rec.home_goals == 1
        assert rec.away_goals == 5
        assert rec.venue is Venue.NEUTRAL

    def test_header_only_empty_list(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER)
        assert load_matches(p) == []

    def test_negative_goals_rejected_with_line(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER
                  + "2014-06-13,Spain,Netherlands,1,5,N\n"
                  + "2014-06-14,Chile,Australia,-1,1,N\n")
        with pytest.raises(DataError) as err:
            load_matches(p)
        assert err.value.line == 3
        assert "goals1" in str(err.value)

    def test_unknown_venue_rejected(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER + "2014-06-13,Spain,Netherlands,1,5,Q\n")
        with pytest.raises(DataError, match="venue"):
            load_matches(p)

    def test_bad_date_rejected(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER + "13/06/2014,Spain,Netherlands,1,5,N\n")
        with pytest.raises(DataError, match="date"):
            load_matches(p)

    def test_same_team_twice_rejected(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER + "2014-06-13,Spain,Spain,1,1,N\n")
        with pytest.raises(DataError):
            load_matches(p)

    def test_aliases_normalized(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER + "2004-03-31,Yugoslavia,Norway,0,1,N\n")
        records = load_matches(p)
        assert records[0].home_team == "Serbia"

    def test_optional_elo_columns(self, tmp_path):
        p = write(tmp_path, "m.csv",
                  "date,team1,team2,goals1,goals2,venue,elo1,elo2\n"
                  "2014-06-13,Spain,Netherlands,1,5,N,2086.0,1959.0\n")
        rec = load_matches(p)[0]
        assert rec.elo_home_at_match == 2086.0
        assert rec.elo_away_at_match == 1959.0

    def test_preserves_file_order(self, tmp_path):
        p = write(tmp_path, "m.csv", MATCH_HEADER
                  + "2014-06-13,Spain,Netherlands,1,5,N\n"
                  + "2014-06-12,Brazil,Croatia,3,1,N\n")
        records = load_matches(p)
        assert [r.home_team for r in records] == ["Spain", "Brazil"]


class TestLoadElo:
    def test_paper_anchor_values(self, tmp_path):
        p = write(tmp_path, "elo.csv", "team,rating\nBrazil,2131\nGermany,2092\n")
        snap = load_elo_snapshot(p)
        assert snap["Brazil"] == 2131
        assert snap["Germany"] == 2092

    def test_empty_file_rejected(self, tmp_path):
        p = write(tmp_path, "elo.csv", "team,rating\n")
        with pytest.raises(DataError, match="no participants"):
            load_elo_snapshot(p)

    def test_duplicate_team_rejected(self, tmp_path):
        p = write(tmp_path, "elo.csv", "team,rating\nBrazil,2131\nBrazil,2000\n")
        with pytest.raises(DataError, match="duplicate"):
            load_elo_snapshot(p)

    def test_non_numeric_rating_rejected(self, tmp_path):
        p = write(tmp_path, "elo.csv", "team,rating\nBrazil,strong\n")
        with pytest.raises(DataError, match="non-numeric"):
            load_elo_snapshot(p)

    def test_as_of_comment(self, tmp_path):
        p = write(tmp_path, "elo.csv", "# as_of=2018-03-28\nteam,rating\nBrazil,2131\n")
        snap = load_elo_snapshot(p)
        assert snap.as_of == dt.date(2018, 3, 28)


def _fixture_matches(tmp_path):
    rows = [
        "2010-08-11,France,Norway,1,2,N",        # excluded by France override
        "2011-06-03,Belarus,France,1,1,N",       # excluded by France override
        "2013-02-06,France,Germany,1,2,N",
        "2014-11-14,Sweden,France,0,1,N",
        "2016-06-15,France,Albania,2,0,H1",      # EURO 2016 home, included by window
        "2016-10-07,France,Bulgaria,4,1,H1",     # home but outside any window
        "2015-03-26,Brazil,France,3,1,N",
    ]
    return write(tmp_path, "m.csv", MATCH_HEADER + "\n".join(rows) + "\n")


FILTER_2018 = DataFilter(
    date_from=dt.date(2010, 1, 1),
    date_to=dt.date(2017, 12, 31),
    venue_policy="neutral_only",
    team_overrides={
        "France": TeamOverride(
            date_from=dt.date(2012, 1, 1),
            include_windows=((dt.date(2016, 6, 10), dt.date(2016, 7, 10)),),
        ),
    },
)

ELO = EloSnapshot({"France": 1984.0, "Germany": 2092.0, "Sweden": 1796.0,
                   "Brazil": 2131.0, "Norway": 1700.0, "Belarus": 1600.0,
                   "Albania": 1550.0, "Bulgaria": 1600.0})


class TestObservations:
    def test_override_drops_early_matches(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        obs = oriented_observations(matches, "France", FILTER_2018, ELO)
        assert all(o.date >= dt.date(2012, 1, 1) for o in obs)

    def test_include_window_admits_home_match(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        obs = oriented_observations(matches, "France", FILTER_2018, ELO)
        dates = {o.date for o in obs}
        assert dt.date(2016, 6, 15) in dates
        assert dt.date(2016, 10, 7) not in dates

    def test_retained_count_matches_manual_scan(self, tmp_path):
        # Retained for France: 2013 Germany, 2014 Sweden, 2016 EURO window,
        # 2015 Brazil; excluded: two pre-2012 and the 2016 home friendly.
        matches = load_matches(_fixture_matches(tmp_path))
        obs = observations_for_team(matches, "France", FILTER_2018, ELO)
        assert len(obs) == 4

    def test_away_side_orientation(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        obs = oriented_observations(matches, "France", FILTER_2018, ELO)
        by_date = {o.date: o for o in obs}
        sweden_game = by_date[dt.date(2014, 11, 14)]
        assert sweden_game.goals_for == 1
        assert sweden_game.goals_against == 0

    def test_orientation_consistency_between_viewpoints(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        loose = DataFilter(dt.date(2010, 1, 1), dt.date(2017, 12, 31), "all")
        france = {o.date: o for o in oriented_observations(matches, "France", loose, ELO)}
        brazil = {o.date: o for o in oriented_observations(matches, "Brazil", loose, ELO)}
        day = dt.date(2015, 3, 26)
        assert france[day].goals_for == brazil[day].goals_against
        assert france[day].goals_against == brazil[day].goals_for

    def test_filtering_idempotent(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        first = observations_for_team(matches, "France", FILTER_2018, ELO)
        second = observations_for_team(matches, "France", FILTER_2018, ELO)
        assert first == second

    def test_opponent_elo_bit_exact_from_snapshot(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        for obs in oriented_observations(matches, "France", FILTER_2018, ELO):
            assert obs.opponent_elo == ELO[obs.opponent]

    def test_per_match_elo_takes_precedence(self, tmp_path):
        p = write(tmp_path, "m.csv",
                  "date,team1,team2,goals1,goals2,venue,elo1,elo2\n"
                  "2014-06-13,Spain,Netherlands,1,5,N,2086.0,1959.0\n")
        matches = load_matches(p)
        loose = DataFilter(dt.date(2014, 1, 1), dt.date(2014, 12, 31), "all")
        obs = oriented_observations(matches, "Spain", loose, {"Spain": 1.0, "Netherlands": 1.0})
        assert obs[0].opponent_elo == 1959.0
        assert obs[0].own_elo == 2086.0

    def test_zero_retained_raises_named_error(self, tmp_path):
        # Albania's only fixture match is France's home EURO game, which the
        # neutral-only policy drops for Albania itself.
        matches = load_matches(_fixture_matches(tmp_path))
        with pytest.raises(InsufficientDataError, match="Albania"):
            observations_for_team(matches, "Albania", FILTER_2018, ELO)

    def test_opponents_only_restriction(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        narrowed = DataFilter(
            dt.date(2010, 1, 1), dt.date(2017, 12, 31), "neutral_only",
            team_overrides={"France": TeamOverride(opponents_only=frozenset({"Germany"}))})
        obs = oriented_observations(matches, "France", narrowed, ELO)
        assert {o.opponent for o in obs} == {"Germany"}

    def test_missing_opponent_rating_raises(self, tmp_path):
        matches = load_matches(_fixture_matches(tmp_path))
        with pytest.raises(DataError, match="Norway"):
            observations_for_team(
                matches, "France",
                DataFilter(dt.date(2010, 1, 1), dt.date(2017, 12, 31), "all"),
                {"France": 1984.0})
