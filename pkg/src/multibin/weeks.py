"""MMWR epidemic-week helpers.

Week labels are canonicalised to ``"YYYY-EWww"``.  A FluSight season named
by its starting year runs from EW40 of that year to EW20 of the next, and
all neighbourhood computations follow that season order rather than the
calendar week number.
"""

from __future__ import annotations

import datetime as _dt
import re

SEASON_FIRST_WEEK = 40
SEASON_LAST_WEEK = 20

_LABEL_RE = re.compile(r"^\s*(\d{4})\s*-?\s*EW\s*(\d{1,2})\s*$", re.IGNORECASE)
_COMPACT_RE = re.compile(r"^\s*(\d{4})(\d{2})\s*$")
_BARE_RE = re.compile(r"^\s*(?:EW)?\s*(\d{1,2})(?:\.0*)?\s*$", re.IGNORECASE)


def _mmwr_year_start(year: int) -> _dt.date:
    # Week 1 is the first Sunday-Saturday week holding at least four days of January.
    jan1 = _dt.date(year, 1, 1)
    days_since_sunday = (jan1.weekday() + 1) % 7
    if days_since_sunday <= 3:
        return jan1 - _dt.timedelta(days=days_since_sunday)
    return jan1 + _dt.timedelta(days=7 - days_since_sunday)


def weeks_in_year(year: int) -> int:
    """Number of MMWR weeks (52 or 53) in ``year``."""
    return (_mmwr_year_start(year + 1) - _mmwr_year_start(year)).days // 7


def format_week(year: int, week: int) -> str:
    return f"{year:04d}-EW{week:02d}"


def season_weeks(season: int) -> list[str]:
    """Ordered week labels of the season starting in ``season``."""
    first = [format_week(season, w) for w in range(SEASON_FIRST_WEEK, weeks_in_year(season) + 1)]
    second = [format_week(season + 1, w) for w in range(1, SEASON_LAST_WEEK + 1)]
    return first + second


def season_of(label: str) -> int:
    year, week = split_week(label)
    return year if week >= 30 else year - 1


def split_week(label: str) -> tuple[int, int]:
    m = _LABEL_RE.match(label) or _COMPACT_RE.match(label)
    if not m:
        raise ValueError(f"not an epidemic week label: {label!r}")
    year, week = int(m.group(1)), int(m.group(2))
    if not 1 <= week <= weeks_in_year(year):
        raise ValueError(f"week {week} does not exist in {year}")
    return year, week


def week_in_season(week: int, season: int) -> str:
    """Label for a bare week number interpreted inside ``season``."""
    if week >= 30:
        return format_week(season, week)
    return format_week(season + 1, week)


def canonical_week(value, season: int | None = None) -> str:
    """Normalise ``value`` to ``"YYYY-EWww"``.

    Accepts full labels (``"2017-EW06"``, ``"201706"``), or a bare week
    number (``6``, ``"EW06"``, ``"6.0"``) when ``season`` is given.
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if season is None:
            raise ValueError(f"bare week number {value!r} needs a season")
        return week_in_season(int(value), season)
    text = str(value)
    m = _LABEL_RE.match(text) or _COMPACT_RE.match(text)
    if m:
        return format_week(*split_week(format_week(int(m.group(1)), int(m.group(2)))))
    m = _BARE_RE.match(text)
    if m and season is not None:
        return week_in_season(int(m.group(1)), season)
    raise ValueError(f"not an epidemic week label: {value!r}")


def week_offset(label: str, delta: int) -> str:
    """Shift a week label by ``delta`` weeks across year boundaries."""
    year, week = split_week(label)
    start = _mmwr_year_start(year) + _dt.timedelta(weeks=week - 1 + delta)
    y = start.year + 1
    while _mmwr_year_start(y) > start:
        y -= 1
    return format_week(y, (start - _mmwr_year_start(y)).days // 7 + 1)


def week_key(label: str) -> tuple[int, int]:
    """Sort key giving chronological order."""
    return split_week(label)
