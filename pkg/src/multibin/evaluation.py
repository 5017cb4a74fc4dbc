"""Season-level scoring: evaluation windows, per-target averages, comparison tables."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import weeks
from .errors import DuplicateForecast, MalformedRow, MissingForecast, MissingTruth, ShapeMismatch
from .flusight import (
    TARGET_NAMES,
    ForecastRecord,
    TruthRecord,
    target_id_of,
    target_spec,
    with_forecast,
)
from .forecast import TARGET_IDS, WEEK_AHEAD_TARGETS
from .hedging import DEFAULT_CONFIG, HedgeResult, OptimizerConfig, hedge_forecast
from .scoring import MULTIBIN_LOG, ScoreRule, outcome_scores

ORIGINAL = "original"
HEDGED = "hedged"


@dataclass(frozen=True)
class EvaluationWindow:
    """Issue weeks whose forecasts of ``target_id`` count toward the average.

    ``location=None`` applies the window to every location.
    """

    target_id: str
    included_issue_weeks: tuple
    location: Optional[str] = None

    def __post_init__(self):
        ws = tuple(sorted(set(self.included_issue_weeks), key=weeks.week_key))
        if not ws:
            raise ValueError(f"evaluation window for {self.target_id} is empty")
        object.__setattr__(self, "included_issue_weeks", ws)

    def applies_to(self, location: str) -> bool:
        return self.location is None or self.location == location


@dataclass(frozen=True)
class Cell:
    mean: float
    count: int


@dataclass(frozen=True)
class ScoredForecast:
    team: str
    location: str
    target_id: str
    issue_week: str
    score: float


@dataclass
class ScoreRow:
    """Per-target season averages for one variant (original or hedged)."""

    label: str
    cells: dict
    scored: list = field(default_factory=list)

    @property
    def targets(self) -> tuple:
        return tuple(t for t in TARGET_IDS if t in self.cells)


@dataclass
class ScoreTable:
    rows: dict
    targets: tuple
    gains: dict


def default_rules(floor: Optional[float] = None, d_overrides: Optional[Mapping[str, int]] = None) -> dict:
    """Multibin log score with each target's default window half-width."""
    d_overrides = d_overrides or {}
    return {
        t: ScoreRule(MULTIBIN_LOG, d_overrides.get(t, target_spec(t).d), floor)
        for t in TARGET_IDS
    }


def _rule_for(rules, target_id: str) -> ScoreRule:
    if rules is None:
        return default_rules()[target_id]
    if isinstance(rules, ScoreRule):
        return rules
    return rules[target_id]


def _season_of(rec: ForecastRecord) -> int:
    return weeks.season_of(rec.issue_week) if rec.issue_week else target_spec(rec.target_id).season


def score_record(rec: ForecastRecord, truth_bin: int, rule: ScoreRule) -> float:
    """Score one forecast, keeping the onset "none" bin out of every window."""
    spec = target_spec(rec.target_id, _season_of(rec))
    isolated = (spec.none_index,) if spec.has_none else ()
    return float(outcome_scores(rec.forecast.probs, rule, isolated)[truth_bin])


def _truth_index(truth: Iterable[TruthRecord]) -> dict:
    index = {}
    for t in truth:
        index.setdefault((t.location, t.target_id, t.issue_week), t)
    return index


def _find_truth(index: dict, rec: ForecastRecord) -> TruthRecord:
    hit = index.get((rec.location, rec.target_id, rec.issue_week))
    if hit is None and rec.target_id not in WEEK_AHEAD_TARGETS:
        hit = index.get((rec.location, rec.target_id, None))
    if hit is None:
        raise MissingTruth(
            f"no truth for {rec.location} / {rec.target_id} issued {rec.issue_week}"
        )
    return hit


def evaluate_season(
    forecasts: Sequence[ForecastRecord],
    truth: Sequence[TruthRecord],
    windows: Sequence[EvaluationWindow],
    rules: Union[ScoreRule, Mapping[str, ScoreRule], None] = None,
    label: str = ORIGINAL,
) -> ScoreRow:
    """Average scores per target over the weeks each window includes.

    Forecasts outside every window are ignored.  Averages use a fixed
    (chronological) summation order, so input order never matters.

    Raises
    ------
    MissingForecast, MissingTruth, DuplicateForecast
    """
    by_key: dict = {}
    for rec in forecasts:
        key = (rec.location, rec.target_id, rec.issue_week)
        if key in by_key:
            raise DuplicateForecast(
                f"two forecasts for {rec.location} / {rec.target_id} issued {rec.issue_week}"
            )
        by_key[key] = rec
    truth_idx = _truth_index(truth)
    locations = sorted({rec.location for rec in forecasts})

    cells: dict = {}
    scored: list = []
    for target in TARGET_IDS:
        tw = [w for w in windows if w.target_id == target]
        if not tw:
            continue
        rule = _rule_for(rules, target)
        values = []
        for loc in locations or [w.location for w in tw if w.location]:
            for w in tw:
                if not w.applies_to(loc):
                    continue
                for week in w.included_issue_weeks:
                    rec = by_key.get((loc, target, week))
                    if rec is None:
                        raise MissingForecast(f"no {target} forecast for {loc} issued {week}")
                    t = _find_truth(truth_idx, rec)
                    s = score_record(rec, t.resolved_bin, rule)
                    values.append(s)
                    scored.append(ScoredForecast(rec.team, loc, target, week, s))
        if not values:
            raise MissingForecast(f"no {target} forecasts fall inside the evaluation window")
        mean = -math.inf if any(math.isinf(v) for v in values) else math.fsum(values) / len(values)
        cells[target] = Cell(mean, len(values))
    return ScoreRow(label, cells, scored)


def _hedge_one(args):
    rec, cfg, d, strict = args
    spec = target_spec(rec.target_id, _season_of(rec))
    isolated = (spec.none_index,) if spec.has_none else ()
    return hedge_forecast(rec.forecast, d, cfg, isolated=isolated, strict=strict)


def hedge_records(
    forecasts: Sequence[ForecastRecord],
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    d_overrides: Optional[Mapping[str, int]] = None,
    strict: bool = False,
    workers: int = 1,
) -> list[tuple[ForecastRecord, HedgeResult]]:
    """Hedge every forecast with its target's ``d``; returns ``(hedged_record, result)`` pairs."""
    d_overrides = d_overrides or {}
    jobs = [
        (rec, cfg, d_overrides.get(rec.target_id, target_spec(rec.target_id).d), strict)
        for rec in forecasts
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_hedge_one, jobs, chunksize=8))
    else:
        results = [_hedge_one(j) for j in jobs]
    return [(with_forecast(rec, res.g), res) for rec, res in zip(forecasts, results)]


def hedge_season(
    forecasts: Sequence[ForecastRecord],
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    d_overrides: Optional[Mapping[str, int]] = None,
    strict: bool = False,
    workers: int = 1,
) -> list[ForecastRecord]:
    """Replace each forecast by its optimised hedge on the original bin grid."""
    return [rec for rec, _ in hedge_records(forecasts, cfg, d_overrides, strict, workers)]


def compare_table(original: ScoreRow, hedged: ScoreRow) -> ScoreTable:
    """Two-row table with per-target gains (hedged minus original)."""
    if original.targets != hedged.targets:
        raise ShapeMismatch(f"targets differ: {original.targets} vs {hedged.targets}")
    for t in original.targets:
        if original.cells[t].count != hedged.cells[t].count:
            raise ShapeMismatch(
                f"{t}: {original.cells[t].count} vs {hedged.cells[t].count} scored forecasts"
            )
    gains = {}
    for t in original.targets:
        a, b = original.cells[t].mean, hedged.cells[t].mean
        gains[t] = b - a if math.isfinite(a) and math.isfinite(b) else math.nan
    return ScoreTable({ORIGINAL: original, HEDGED: hedged}, original.targets, gains)


# windows -----------------------------------------------------------------


def build_windows(
    issue_weeks: Iterable[str],
    onset_week: Optional[str],
    below_baseline_week: Optional[str],
    targets: Sequence[str] = TARGET_IDS,
    location: Optional[str] = None,
) -> list[EvaluationWindow]:
    """Evaluation windows following the FluSight collaborative scoring rules.

    * onset: from the first forecast until six weeks after the observed onset
      (every week if there was no onset);
    * peak week and peak intensity: until the first week wILI is back below
      baseline for the rest of the season (``below_baseline_week``);
    * week-ahead wILI: from four weeks before onset until three weeks after
      ``below_baseline_week``.

    Windows are configuration; pass explicit ones when a different
    convention is needed.
    """
    ws = sorted(set(issue_weeks), key=weeks.week_key)
    key = weeks.week_key

    def between(lo, hi):
        return [w for w in ws if (lo is None or key(w) >= key(lo)) and (hi is None or key(w) <= key(hi))]

    onset_end = weeks.week_offset(onset_week, 6) if onset_week else None
    ahead_start = weeks.week_offset(onset_week, -4) if onset_week else None
    ahead_end = weeks.week_offset(below_baseline_week, 3) if below_baseline_week else None
    plan = {
        "onset_week": between(None, onset_end),
        "peak_week": between(None, below_baseline_week),
        "peak_intensity": between(None, below_baseline_week),
    }
    for t in WEEK_AHEAD_TARGETS:
        plan[t] = between(ahead_start, ahead_end)
    return [EvaluationWindow(t, tuple(plan[t]), location) for t in targets if plan.get(t)]


def season_milestones(
    wili: Mapping[str, float], baseline: float, decimals: Optional[int] = 1
) -> tuple[Optional[str], Optional[str]]:
    """``(onset_week, below_baseline_week)`` from a weekly wILI series.

    Onset is the first of three consecutive weeks at or above baseline.
    ``below_baseline_week`` is the first week after the last above-baseline
    week.  Values are rounded to ``decimals`` before comparison.
    """
    series = sorted(wili.items(), key=lambda kv: weeks.week_key(kv[0]))

    def above(v):
        return (round(v, decimals) if decimals is not None else v) >= baseline

    onset = None
    run = 0
    for w, v in series:
        run = run + 1 if above(v) else 0
        if run == 3:
            onset = weeks.week_offset(w, -2)
            break
    below = None
    last_above = max((i for i, (_, v) in enumerate(series) if above(v)), default=None)
    if last_above is not None and last_above + 1 < len(series):
        below = series[last_above + 1][0]
    return onset, below


def parse_windows(csv_content: str) -> list[EvaluationWindow]:
    """Windows from a CSV with columns ``target, epiweek`` and optional ``location``."""
    reader = csv.DictReader(io.StringIO(csv_content))
    if not reader.fieldnames:
        raise MalformedRow("windows file has no header")
    cols = {c.strip().lower(): c for c in reader.fieldnames}
    if "target" not in cols or "epiweek" not in cols:
        raise MalformedRow("windows file needs 'target' and 'epiweek' columns")
    grouped: dict = {}
    for line, row in enumerate(reader, start=2):
        try:
            week = weeks.canonical_week(row[cols["epiweek"]].strip())
        except (ValueError, AttributeError):
            raise MalformedRow(f"line {line}: bad epiweek {row.get(cols['epiweek'])!r}") from None
        loc = row.get(cols["location"], "").strip() if "location" in cols else ""
        grouped.setdefault((target_id_of(row[cols["target"]]), loc or None), []).append(week)
    order = {t: i for i, t in enumerate(TARGET_IDS)}
    return [
        EvaluationWindow(t, tuple(ws), loc)
        for (t, loc), ws in sorted(grouped.items(), key=lambda kv: (order[kv[0][0]], kv[0][1] or ""))
    ]


def windows_to_csv(windows: Iterable[EvaluationWindow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["target", "epiweek", "location"])
    for win in windows:
        for week in win.included_issue_weeks:
            w.writerow([TARGET_NAMES[win.target_id], week, win.location or ""])
    return out.getvalue()


# output ------------------------------------------------------------------

_SHORT = {
    "wili_1wk": "1 wk",
    "wili_2wk": "2 wk",
    "wili_3wk": "3 wk",
    "wili_4wk": "4 wk",
    "onset_week": "onset week",
    "peak_week": "peak week",
    "peak_intensity": "peak intensity",
}


def _num(x: float, precision: int) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.{precision}f}"


def table_to_text(table: ScoreTable, precision: int = 2) -> str:
    heads = [_SHORT[t] for t in table.targets]
    rows = []
    for name in (ORIGINAL, HEDGED):
        row = table.rows[name]
        rows.append([f"{name} forecasts"] + [_num(row.cells[t].mean, precision) for t in table.targets])
    rows.append(["gain"] + [_num(table.gains[t], precision) for t in table.targets])
    rows.append(["n scored"] + [str(table.rows[ORIGINAL].cells[t].count) for t in table.targets])
    widths = [max(len(r[i]) for r in rows + [[""] + heads]) for i in range(len(heads) + 1)]
    lines = ["  ".join(h.rjust(widths[i]) for i, h in enumerate([""] + heads))]
    lines.append("-" * len(lines[0]))
    for r in rows:
        lines.append("  ".join(c.rjust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(lines) + "\n"


def table_to_csv(table: ScoreTable, precision: Optional[int] = None) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["variant"] + list(table.targets))
    fmt = (lambda x: repr(x)) if precision is None else (lambda x: _num(x, precision))
    for name in (ORIGINAL, HEDGED):
        row = table.rows[name]
        w.writerow([name] + [fmt(row.cells[t].mean) for t in table.targets])
    w.writerow(["gain"] + [fmt(table.gains[t]) for t in table.targets])
    w.writerow(["count"] + [table.rows[ORIGINAL].cells[t].count for t in table.targets])
    return out.getvalue()


def score_log_csv(original: ScoreRow, hedged: Optional[ScoreRow] = None, precision: Optional[int] = None) -> str:
    """Per-forecast scores: team, location, target, week, score_original, score_hedged."""
    fmt = (lambda x: repr(x)) if precision is None else (lambda x: _num(x, precision))
    hedged_by_key = {}
    if hedged is not None:
        hedged_by_key = {(s.location, s.target_id, s.issue_week): s.score for s in hedged.scored}
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["team", "location", "target", "week", "score_original", "score_hedged"])
    for s in original.scored:
        h = hedged_by_key.get((s.location, s.target_id, s.issue_week))
        w.writerow([s.team, s.location, TARGET_NAMES[s.target_id], s.issue_week, fmt(s.score), "" if h is None else fmt(h)])
    return out.getvalue()
