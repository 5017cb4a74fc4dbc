"""Command-line front end.

Subcommands: ``score``, ``hedge``, ``blur``, ``examples``, ``table1``.
Exit codes: 0 success, 1 input error, 2 numeric failure (``--strict``).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import evaluation as ev
from .errors import InputError, NumericError
from .flusight import (
    TARGET_NAMES,
    infer_file_metadata,
    load_submissions,
    parse_submission,
    parse_truth,
    replace_bin_values,
)
from .forecast import TARGET_IDS, pad_support, validate_forecast
from .hedging import OptimizerConfig
from .scoring import LOG, ScoreRule, blur
from .worked_examples import solve_all

log = logging.getLogger("multibin")

SAMPLE_DIR = Path(__file__).resolve().parent / "data" / "sample"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _fmt(x: float, precision: int) -> str:
    if np.isneginf(x):
        return "-inf"
    if np.isnan(x):
        return "nan"
    s = f"{x:.{precision}f}"
    # avoid "-0.000"
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def _rules(args) -> dict:
    if args.rule == "log":
        if args.d is not None:
            log.warning("--d is ignored for --rule log")
        return {t: ScoreRule(LOG, 0, args.floor) for t in TARGET_IDS}
    overrides = {t: args.d for t in TARGET_IDS} if args.d is not None else None
    return ev.default_rules(args.floor, overrides)


def _d_overrides(args) -> Optional[dict]:
    return {t: args.d for t in TARGET_IDS} if getattr(args, "d", None) is not None else None


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(args.max_iter, args.rel_tol, args.negativity_tol)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file or directory: {path}")
    return p


def _all_weeks_windows(records) -> list:
    by_target: dict = {}
    for r in records:
        if r.issue_week is not None:
            by_target.setdefault(r.target_id, set()).add(r.issue_week)
    return [ev.EvaluationWindow(t, tuple(ws)) for t, ws in by_target.items()]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _single_row_text(row: ev.ScoreRow, precision: int) -> str:
    lines = [f"{'target':<24}{'mean':>10}{'n':>6}"]
    for t in row.targets:
        c = row.cells[t]
        lines.append(f"{TARGET_NAMES[t]:<24}" + f"{_fmt(c.mean, precision):>10}{c.count:>6}")
    return "\n".join(lines) + "\n"


# subcommands --------------------------------------------------------------


def cmd_score(args) -> int:
    records = load_submissions(_existing(args.submission), season=args.season)
    truth = parse_truth(_existing(args.truth).read_text(), season=args.season)
    windows = (
        ev.parse_windows(_existing(args.windows).read_text()) if args.windows else _all_weeks_windows(records)
    )
    if not windows:
        raise InputError("no issue weeks known: name files EWww-YYYY-TEAM.csv or pass --windows")
    row = ev.evaluate_season(records, truth, windows, _rules(args))
    if args.format == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["team", "location", "target", "week", "score"])
        for s in row.scored:
            w.writerow([s.team, s.location, TARGET_NAMES[s.target_id], s.issue_week, _fmt(s.score, args.precision)])
        for t in row.targets:
            w.writerow(["", "", TARGET_NAMES[t], "mean", _fmt(row.cells[t].mean, args.precision)])
        _emit(out.getvalue(), args.output)
    else:
        lines = [
            f"{s.issue_week}  {s.location}  {TARGET_NAMES[s.target_id]:<24}{_fmt(s.score, args.precision):>10}"
            for s in row.scored
        ]
        _emit("\n".join(lines) + "\n\n" + _single_row_text(row, args.precision), args.output)
    return EXIT_OK


def cmd_hedge(args) -> int:
    path = _existing(args.submission)
    text = path.read_text()
    team, issue = infer_file_metadata(path)
    records = parse_submission(text, team=team, issue_week=issue, season=args.season)
    pairs = ev.hedge_records(records, _optimizer(args), _d_overrides(args), args.strict, args.workers)
    _emit(replace_bin_values(text, [rec for rec, _ in pairs], season=args.season), args.output)

    report = io.StringIO()
    w = csv.writer(report, lineterminator="\n")
    w.writerow(["location", "target", "method", "iterations", "converged", "expected_gain"])
    for (rec, res) in pairs:
        w.writerow(
            [rec.location, TARGET_NAMES[rec.target_id], res.method, res.iterations, res.converged,
             _fmt(res.expected_gain, args.precision)]
        )
    if args.report:
        Path(args.report).write_text(report.getvalue())
    else:
        sys.stderr.write(report.getvalue())

    if args.plot_data:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["location", "target", "bin", "series", "probability"])
        for orig, (rec, _) in zip(records, pairs):
            for series, fc in (("F", orig.forecast), ("G", rec.forecast)):
                for label, p in zip(fc.bin_labels, fc.probs):
                    w.writerow([rec.location, TARGET_NAMES[rec.target_id], label, series, repr(float(p))])
        Path(args.plot_data).write_text(out.getvalue())
    return EXIT_OK


def cmd_blur(args) -> int:
    probs = [float(x) for chunk in args.probs for x in chunk.split(",") if x.strip()]
    f = validate_forecast(probs)
    if args.pad:
        f = pad_support(f, args.d)
    b = blur(f, args.d)
    if args.format == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["bin", "probability", "blurred"])
        for label, p, q in zip(f.bin_labels, f.probs, b.probs):
            w.writerow([label, _fmt(p, args.precision), _fmt(q, args.precision)])
        _emit(out.getvalue(), args.output)
    else:
        _emit(" ".join(_fmt(q, args.precision) for q in b.probs) + "\n", args.output)
    return EXIT_OK


def cmd_examples(args) -> int:
    sols = solve_all()
    p = args.precision
    if args.format == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["example", "bin", "series", "probability"])
        for s in sols:
            for series, fc in (("F", s.f), ("G", s.g), ("F_blurred", s.f_blur), ("G_blurred", s.g_blur)):
                for label, q in zip(fc.bin_labels, fc.probs):
                    w.writerow([s.number, label, series, _fmt(q, p)])
            w.writerow([s.number, "", "expected_score_F", _fmt(s.score_f, p)])
            w.writerow([s.number, "", "expected_score_G", _fmt(s.score_g, p)])
        _emit(out.getvalue(), args.output)
        return EXIT_OK

    lines = []
    for s in sols:
        width = max(p + 3, 6)
        lines.append(f"Example {s.number} (d=1, method={s.hedge.method})")
        lines.append("  week " + "".join(f"{lab:>{width}}" for lab in s.f.bin_labels))
        for name, fc in (("F   ", s.f), ("G   ", s.g), ("F~  ", s.f_blur), ("G~  ", s.g_blur)):
            lines.append(f"  {name} " + "".join(f"{_fmt(q, p):>{width}}" for q in fc.probs))
        lines.append(f"  E[MBlogS(F,Y)|F] = {_fmt(s.score_f, p)}")
        lines.append(f"  E[MBlogS(G,Y)|F] = {_fmt(s.score_g, p)}")
        same = bool(np.max(np.abs(s.g_blur.probs - s.f.probs)) <= 1e-10)
        lines.append(f"  blur(G) equals F: {'yes' if same else 'no'}")
        lines.append("")
    _emit("\n".join(lines), args.output)
    return EXIT_OK


def cmd_table1(args) -> int:
    if args.sample:
        sub_dir, truth_path, win_path = SAMPLE_DIR / "submissions", SAMPLE_DIR / "truth.csv", SAMPLE_DIR / "windows.csv"
    else:
        if not (args.submissions and args.truth and args.windows):
            raise InputError(
                "table1 needs --submissions DIR --truth PATH --windows PATH "
                "(see README for obtaining the 2016/17 files), or --sample"
            )
        sub_dir, truth_path, win_path = _existing(args.submissions), _existing(args.truth), _existing(args.windows)
    records = [r for r in load_submissions(sub_dir, season=args.season) if r.location == args.location]
    if args.team:
        records = [r for r in records if r.team == args.team]
    truth = parse_truth(Path(truth_path).read_text(), season=args.season)
    windows = ev.parse_windows(Path(win_path).read_text())
    rules = _rules(args)
    original = ev.evaluate_season(records, truth, windows, rules, label=ev.ORIGINAL)
    in_window = {(s.target_id, s.issue_week) for s in original.scored}
    to_hedge = [r for r in records if (r.target_id, r.issue_week) in in_window]
    hedged_records = ev.hedge_season(to_hedge, _optimizer(args), _d_overrides(args), args.strict, args.workers)
    hedged = ev.evaluate_season(hedged_records, truth, windows, rules, label=ev.HEDGED)
    table = ev.compare_table(original, hedged)
    if args.format == "csv":
        _emit(ev.table_to_csv(table, args.precision), args.output)
    else:
        _emit(ev.table_to_text(table, args.precision), args.output)
    if args.score_log:
        Path(args.score_log).write_text(ev.score_log_csv(original, hedged, args.precision))
    return EXIT_OK


# parser -------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, rule: bool = True) -> None:
    if rule:
        p.add_argument("--rule", choices=("log", "mblog"), default="mblog")
        p.add_argument("--floor", type=float, default=None, help="lower bound applied to every score")
    p.add_argument("--d", type=int, default=None, help="window half-width for every target")
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--precision", type=int, default=3)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--season", type=int, default=None)


def _add_optimizer(p: argparse.ArgumentParser) -> None:
    defaults = OptimizerConfig()
    p.add_argument("--max-iter", type=int, default=defaults.max_iterations)
    p.add_argument("--rel-tol", type=float, default=defaults.rel_tol)
    p.add_argument("--negativity-tol", type=float, default=defaults.negativity_tol)
    p.add_argument("--strict", action="store_true", help="fail (exit 2) if EM does not converge")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multibin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score submission files against truth")
    p.add_argument("submission", help="submission CSV or directory of them")
    p.add_argument("--truth", required=True)
    p.add_argument("--windows", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("hedge", help="write the optimally hedged version of a submission")
    p.add_argument("submission")
    p.add_argument("--report", default=None, help="per-forecast gain report (default: stderr)")
    p.add_argument("--plot-data", default=None, help="tidy CSV of F and G for plotting")
    _add_common(p, rule=False)
    _add_optimizer(p)
    p.set_defaults(func=cmd_hedge)

    p = sub.add_parser("blur", help="moving-average blur of a probability vector")
    p.add_argument("probs", nargs="+", help="probabilities, space or comma separated")
    p.add_argument("--pad", action="store_true", help="pad the support first")
    _add_common(p, rule=False)
    p.set_defaults(func=cmd_blur, d=1)

    p = sub.add_parser("examples", help="reproduce the four worked examples")
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--precision", type=int, default=3)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("table1", help="season table of original vs hedged forecasts")
    p.add_argument("--sample", action="store_true", help="use the bundled synthetic sample")
    p.add_argument("--submissions", default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--windows", default=None)
    p.add_argument("--location", default="US National")
    p.add_argument("--team", default=None)
    p.add_argument("--score-log", default=None, help="per-forecast score CSV")
    _add_common(p)
    _add_optimizer(p)
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (InputError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
