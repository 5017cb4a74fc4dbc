import pytest

from multibin import weeks


def test_year_lengths():
    # MMWR years 2014 and 2020 have 53 weeks
    assert weeks.weeks_in_year(2014) == 53
    assert weeks.weeks_in_year(2020) == 53
    assert weeks.weeks_in_year(2016) == 52
    assert weeks.weeks_in_year(2017) == 52


def test_season_order_wraps_calendar():
    s = weeks.season_weeks(2016)
    assert s[0] == "2016-EW40"
    assert s[12] == "2016-EW52"
    assert s[13] == "2017-EW01"
    assert s[-1] == "2017-EW20"
    assert len(s) == 33
    assert len(weeks.season_weeks(2014)) == 34


@pytest.mark.parametrize(
    "raw, season, expected",
    [
        ("2017-EW06", None, "2017-EW06"),
        ("2017EW6", None, "2017-EW06"),
        ("201706", None, "2017-EW06"),
        (6, 2016, "2017-EW06"),
        ("EW49", 2016, "2016-EW49"),
        ("49.0", 2016, "2016-EW49"),
    ],
)
def test_canonical(raw, season, expected):
    assert weeks.canonical_week(raw, season) == expected


def test_bad_labels():
    with pytest.raises(ValueError):
        weeks.canonical_week("2016-EW53")
    with pytest.raises(ValueError):
        weeks.canonical_week(6)


def test_offsets_cross_year():
    assert weeks.week_offset("2016-EW52", 1) == "2017-EW01"
    assert weeks.week_offset("2017-EW01", -1) == "2016-EW52"
    assert weeks.week_offset("2014-EW52", 1) == "2014-EW53"
    assert weeks.week_offset("2016-EW50", 6) == "2017-EW04"
    assert weeks.week_offset("2016-EW50", 0) == "2016-EW50"


def test_season_of():
    assert weeks.season_of("2017-EW06") == 2016
    assert weeks.season_of("2016-EW45") == 2016
