"""FluSight submission and truth files.

Submission CSVs carry the columns ``Location, Target, Type, Unit,
Bin_start_incl, Bin_end_notincl, Value`` (header matched
case-insensitively, extra columns ignored).  Only ``Bin`` rows are read.

Truth CSVs carry ``Location, Target, Value`` and an optional ``Epiweek``
column naming the forecast week a week-ahead observation belongs to.
Seasonal targets (onset, peak week, peak intensity) leave it blank.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, replace
from datetime import date
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional

from . import weeks
from .errors import BinGridMismatch, MalformedRow, OutOfRange, UnknownTarget
from .forecast import (
    NONE_LABEL,
    TARGET_IDS,
    WEEK_TARGETS,
    Bin,
    CategoricalForecast,
    TargetSpec,
    outcome_to_bin,
    validate_forecast,
)

DEFAULT_SEASON = 2016
SUBMISSION_TOL = 1e-3

SUBMISSION_COLUMNS = (
    "location",
    "target",
    "type",
    "unit",
    "bin_start_incl",
    "bin_end_notincl",
    "value",
)
SUBMISSION_HEADER = ("Location", "Target", "Type", "Unit", "Bin_start_incl", "Bin_end_notincl", "Value")

TARGET_NAMES = {
    "wili_1wk": "1 wk ahead",
    "wili_2wk": "2 wk ahead",
    "wili_3wk": "3 wk ahead",
    "wili_4wk": "4 wk ahead",
    "onset_week": "Season onset",
    "peak_week": "Season peak week",
    "peak_intensity": "Season peak percentage",
}
_NAME_TO_ID = {v.lower(): k for k, v in TARGET_NAMES.items()}
_NAME_TO_ID.update({k: k for k in TARGET_NAMES})

DEFAULT_D = {t: 1 if t in WEEK_TARGETS else 5 for t in TARGET_IDS}

WILI_STEP = 0.1
WILI_TOP = 13.0
WILI_CEILING = 100.0
_GRID_EPS = 1e-6


@dataclass(frozen=True)
class ForecastRecord:
    team: str
    location: str
    target_id: str
    issue_week: Optional[str]
    forecast: CategoricalForecast


@dataclass(frozen=True)
class TruthRecord:
    location: str
    target_id: str
    observed: object
    resolved_bin: int
    issue_week: Optional[str] = None


def target_id_of(name: str) -> str:
    key = name.strip().lower()
    try:
        return _NAME_TO_ID[key]
    except KeyError:
        raise UnknownTarget(f"unknown target {name!r}") from None


def _wili_bins() -> tuple:
    n = int(round(WILI_TOP / WILI_STEP))
    bins = [
        Bin(round(k * WILI_STEP, 1), round(k * WILI_STEP, 1), round((k + 1) * WILI_STEP, 1))
        for k in range(n)
    ]
    bins.append(Bin(WILI_TOP, WILI_TOP, WILI_CEILING, closed_right=True))
    return tuple(bins)


@lru_cache(maxsize=None)
def _spec(target_id: str, season: int, d: int) -> TargetSpec:
    if target_id in WEEK_TARGETS:
        bins = [Bin(label) for label in weeks.season_weeks(season)]
        has_none = target_id == "onset_week"
        if has_none:
            bins.append(Bin(NONE_LABEL))
        return TargetSpec(target_id, d, tuple(bins), "week", season, has_none)
    return TargetSpec(target_id, d, _wili_bins(), "percent", season)


def target_spec(target_id: str, season: int = DEFAULT_SEASON, d: Optional[int] = None) -> TargetSpec:
    """Bin grid and window half-width for a FluSight target.

    wILI targets and peak intensity use 0.1-wide bins from 0 to 13 plus a
    ``[13, 100]`` catch-all and ``d = 5``.  Onset and peak week use the
    season's EW40..EW20 weeks and ``d = 1``; onset also has an isolated
    ``"none"`` bin at the end.
    """
    if target_id not in DEFAULT_D:
        raise UnknownTarget(f"unknown target {target_id!r}")
    return _spec(target_id, int(season), DEFAULT_D[target_id] if d is None else int(d))


def _header_map(fieldnames: Optional[Iterable[str]]) -> dict:
    if not fieldnames:
        raise MalformedRow("missing header row")
    return {name.strip().lower(): name for name in fieldnames if name is not None}


def _float(text, what: str, line: int) -> float:
    try:
        return float(str(text).strip())
    except (TypeError, ValueError):
        raise MalformedRow(f"line {line}: cannot parse {what} {text!r}") from None


def _bin_index(spec: TargetSpec, start: str, end: str, line: int) -> int:
    start_s, end_s = str(start).strip(), str(end).strip()
    if spec.is_week_target:
        if start_s.lower() == NONE_LABEL:
            if not spec.has_none:
                raise BinGridMismatch(f"line {line}: {spec.target_id} has no 'none' bin")
            return spec.index_of(NONE_LABEL)
        week = _float(start_s, "bin start", line)
        if week != int(week):
            raise BinGridMismatch(f"line {line}: week bin start {start_s!r} is not whole")
        label = weeks.week_in_season(int(week), spec.season)
        try:
            return spec.index_of(label)
        except OutOfRange:
            raise BinGridMismatch(f"line {line}: week {start_s} not in season {spec.season}") from None
    lo = _float(start_s, "bin start", line)
    hi = _float(end_s, "bin end", line)
    k = int(round(lo / WILI_STEP))
    if abs(lo - k * WILI_STEP) > _GRID_EPS:
        raise BinGridMismatch(f"line {line}: bin start {start_s} is off the 0.1 grid")
    last = len(spec.bins) - 1
    if k < last and abs(hi - (lo + WILI_STEP)) <= _GRID_EPS:
        return k
    if k == last and abs(hi - WILI_CEILING) <= _GRID_EPS:
        return k
    raise BinGridMismatch(f"line {line}: bin [{start_s}, {end_s}) is not on the expected grid")


def _season_for(issue_week: Optional[str], season: Optional[int]) -> int:
    if season is not None:
        return int(season)
    if issue_week is not None:
        return weeks.season_of(issue_week)
    return DEFAULT_SEASON


def parse_submission(
    csv_content: str,
    team: str = "",
    issue_week: Optional[str] = None,
    season: Optional[int] = None,
    tol: float = SUBMISSION_TOL,
) -> list[ForecastRecord]:
    """One :class:`ForecastRecord` per (location, target) in a submission file.

    Probabilities may be off by ``tol`` (rounded files) and are renormalised.

    Raises
    ------
    MalformedRow, UnknownTarget, BinGridMismatch, NotNormalized
    """
    if issue_week is not None:
        issue_week = weeks.canonical_week(issue_week, season)
    season = _season_for(issue_week, season)
    reader = csv.DictReader(io.StringIO(csv_content))
    cols = _header_map(reader.fieldnames)
    missing = [c for c in SUBMISSION_COLUMNS if c not in cols]
    if missing:
        raise MalformedRow(f"missing column(s): {', '.join(missing)}")

    groups: dict[tuple[str, str], dict[int, float]] = {}
    for line, row in enumerate(reader, start=2):
        vals = {c: row.get(cols[c]) for c in SUBMISSION_COLUMNS}
        if any(v is None for v in vals.values()):
            raise MalformedRow(f"line {line}: too few fields")
        kind = vals["type"].strip().lower()
        if kind == "point":
            continue
        if kind != "bin":
            raise MalformedRow(f"line {line}: unknown Type {vals['type']!r}")
        target = target_id_of(vals["target"])
        spec = target_spec(target, season)
        idx = _bin_index(spec, vals["bin_start_incl"], vals["bin_end_notincl"], line)
        value = _float(vals["value"], "value", line)
        bins = groups.setdefault((vals["location"].strip(), target), {})
        if idx in bins:
            raise MalformedRow(f"line {line}: duplicate bin for {vals['location']} / {vals['target']}")
        bins[idx] = value

    records = []
    order = {t: i for i, t in enumerate(TARGET_IDS)}
    for (location, target), bins in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        spec = target_spec(target, season)
        if len(bins) != len(spec.bins):
            absent = [spec.bins[i].label for i in range(len(spec.bins)) if i not in bins]
            raise BinGridMismatch(
                f"{location} / {TARGET_NAMES[target]}: {len(absent)} bin(s) missing, e.g. {absent[:3]}"
            )
        probs = [bins[i] for i in range(len(spec.bins))]
        forecast = validate_forecast(probs, tol=tol, labels=spec.labels)
        records.append(ForecastRecord(team, location, target, issue_week, forecast))
    return records


def _fmt(x: float) -> str:
    return repr(float(x))


def _bin_fields(spec: TargetSpec, i: int) -> tuple[str, str]:
    b = spec.bins[i]
    if spec.is_week_target:
        if b.label == NONE_LABEL:
            return NONE_LABEL, NONE_LABEL
        year, wk = weeks.split_week(b.label)
        return str(wk), str(wk + 1)
    return format(b.start, "g"), format(b.end, "g")


def write_submission(records: Iterable[ForecastRecord], season: Optional[int] = None) -> str:
    """Serialise records as a FluSight submission CSV (Bin rows only)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SUBMISSION_HEADER)
    for rec in records:
        spec = target_spec(rec.target_id, _season_for(rec.issue_week, season))
        unit = spec.units
        for i in range(len(spec.bins)):
            lo, hi = _bin_fields(spec, i)
            w.writerow([rec.location, TARGET_NAMES[rec.target_id], "Bin", unit, lo, hi, _fmt(rec.forecast.probs[i])])
    return out.getvalue()


def replace_bin_values(csv_content: str, records: Iterable[ForecastRecord], season: Optional[int] = None) -> str:
    """Rewrite the Bin values of an existing submission, keeping every other byte of each row.

    Rows are emitted in their original order; Point rows and extra columns
    pass through untouched.
    """
    lookup = {(r.location, r.target_id): r for r in records}
    reader = csv.reader(io.StringIO(csv_content))
    rows = list(reader)
    if not rows:
        raise MalformedRow("empty file")
    header = [h.strip().lower() for h in rows[0]]
    pos = {c: header.index(c) for c in SUBMISSION_COLUMNS if c in header}
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(rows[0])
    for line, row in enumerate(rows[1:], start=2):
        if row and row[pos["type"]].strip().lower() == "bin":
            target = target_id_of(row[pos["target"]])
            rec = lookup.get((row[pos["location"]].strip(), target))
            if rec is not None:
                spec = target_spec(target, _season_for(rec.issue_week, season))
                idx = _bin_index(spec, row[pos["bin_start_incl"]], row[pos["bin_end_notincl"]], line)
                row = list(row)
                row[pos["value"]] = _fmt(rec.forecast.probs[idx])
        w.writerow(row)
    return out.getvalue()


def parse_truth(csv_content: str, season: Optional[int] = None) -> list[TruthRecord]:
    """Observed outcomes with their resolved bin indices.

    Raises
    ------
    MalformedRow, UnknownTarget, OutOfRange
    """
    reader = csv.DictReader(io.StringIO(csv_content))
    cols = _header_map(reader.fieldnames)
    for c in ("location", "target", "value"):
        if c not in cols:
            raise MalformedRow(f"missing column: {c}")
    week_col = cols.get("epiweek")
    records = []
    for line, row in enumerate(reader, start=2):
        loc, tgt, val = (row.get(cols[c]) for c in ("location", "target", "value"))
        if loc is None or tgt is None or val is None:
            raise MalformedRow(f"line {line}: too few fields")
        target = target_id_of(tgt)
        issue = None
        raw_week = row.get(week_col) if week_col else None
        if raw_week and raw_week.strip():
            try:
                issue = weeks.canonical_week(raw_week.strip(), season)
            except ValueError as exc:
                raise MalformedRow(f"line {line}: {exc}") from None
        spec = target_spec(target, _season_for(issue, season))
        val = val.strip()
        if spec.is_week_target:
            if val.lower() == NONE_LABEL:
                observed = NONE_LABEL
            else:
                try:
                    observed = weeks.canonical_week(val, spec.season)
                except ValueError:
                    raise MalformedRow(f"line {line}: cannot parse week {val!r}") from None
        else:
            observed = _float(val, "observed value", line)
        records.append(TruthRecord(loc.strip(), target, observed, outcome_to_bin(observed, spec), issue))
    return records


_FILE_PATTERNS = (
    re.compile(r"^EW(?P<week>\d{1,2})-(?P<year>\d{4})-(?P<team>.+)$", re.IGNORECASE),
    re.compile(r"^EW(?P<week>\d{1,2})-(?P<team>.+)-(?P<date>\d{4}-\d{2}-\d{2})$", re.IGNORECASE),
)


def infer_file_metadata(path) -> tuple[str, Optional[str]]:
    """``(team, issue_week)`` from names like ``EW43-2016-TEAM.csv`` or ``EW43-TEAM-2016-11-07.csv``."""
    stem = Path(path).stem
    for pat in _FILE_PATTERNS:
        m = pat.match(stem)
        if not m:
            continue
        week = int(m.group("week"))
        if "year" in m.groupdict() and m.group("year"):
            year = int(m.group("year"))
        else:
            submitted = date.fromisoformat(m.group("date"))
            year = submitted.year - 1 if (week >= 30 and submitted.month <= 6) else submitted.year
        return m.group("team"), weeks.format_week(year, week)
    return stem, None


def parse_submission_file(path, season: Optional[int] = None, team: Optional[str] = None) -> list[ForecastRecord]:
    inferred_team, issue = infer_file_metadata(path)
    text = Path(path).read_text()
    return parse_submission(text, team=team or inferred_team, issue_week=issue, season=season)


def load_submissions(path, season: Optional[int] = None) -> list[ForecastRecord]:
    """Parse one file, or every ``*.csv`` under a directory (sorted by name)."""
    path = Path(path)
    files = sorted(path.glob("*.csv")) if path.is_dir() else [path]
    records = []
    for f in files:
        records.extend(parse_submission_file(f, season=season))
    return records


def with_forecast(rec: ForecastRecord, forecast: CategoricalForecast) -> ForecastRecord:
    return replace(rec, forecast=forecast)
