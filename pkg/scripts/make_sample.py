"""Regenerate the synthetic FluSight-format sample under src/multibin/data/sample/.

The files mimic the layout of real submission files (one CSV per issue
week, Bin and Point rows, probabilities rounded to 6 decimals) but the
numbers are synthetic: discretised normal distributions around a made-up
season curve.  They exist so the season pipeline can run end to end
without the public dataset.
"""

import csv
import io
import math
from pathlib import Path

import numpy as np

from multibin import weeks
from multibin.flusight import TARGET_NAMES, target_spec

OUT = Path(__file__).resolve().parents[1] / "src" / "multibin" / "data" / "sample"
TEAM = "SYNTHETIC"
LOCATION = "US National"
SEASON = 2016
ISSUE_WEEKS = [weeks.format_week(2016, w) for w in range(46, 53)] + [
    weeks.format_week(2017, w) for w in range(1, 8)
]


def season_curve(label):
    i = weeks.season_weeks(SEASON).index(label)
    return 1.3 + 3.6 * math.exp(-0.5 * ((i - 17.0) / 4.0) ** 2)


def _normal_bins(centres, mean, sd):
    z = (np.asarray(centres, dtype=float) - mean) / sd
    w = np.exp(-0.5 * z**2)
    return w / w.sum()


def _rounded(p):
    return [round(float(x), 6) for x in p]


def forecast_rows(issue):
    rng = np.random.default_rng(weeks.season_weeks(SEASON).index(issue))
    rows = []
    season = weeks.season_weeks(SEASON)
    k = season.index(issue)
    for h, target in enumerate(("wili_1wk", "wili_2wk", "wili_3wk", "wili_4wk"), start=1):
        spec = target_spec(target, SEASON)
        centre = season_curve(season[min(k + h - 1, len(season) - 1)]) + rng.normal(0, 0.15)
        p = _normal_bins([b.start + 0.05 for b in spec.bins], centre, 0.25 + 0.12 * h)
        rows.append((target, spec, _rounded(p), round(centre, 1)))
    spec = target_spec("peak_intensity", SEASON)
    p = _normal_bins([b.start + 0.05 for b in spec.bins], 4.9 + rng.normal(0, 0.2), 0.5)
    rows.append(("peak_intensity", spec, _rounded(p), 4.9))
    for target, mean, sd in (("onset_week", 9.0, 1.2), ("peak_week", 17.0, 1.8)):
        spec = target_spec(target, SEASON)
        n = len(season)
        p = np.zeros(len(spec.bins))
        p[:n] = _normal_bins(np.arange(n), mean + rng.normal(0, 0.6), sd)
        if spec.has_none:
            p[:n] *= 0.97
            p[n] = 0.03
        rows.append((target, spec, _rounded(p), float(spec.bins[int(round(mean))].label[-2:])))
    return rows


def write_week(issue, outdir):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Location", "Target", "Type", "Unit", "Bin_start_incl", "Bin_end_notincl", "Value"])
    for target, spec, probs, point in forecast_rows(issue):
        name = TARGET_NAMES[target]
        w.writerow([LOCATION, name, "Point", spec.units, "NA", "NA", point])
        for b, v in zip(spec.bins, probs):
            if spec.is_week_target:
                lo = hi = "none"
                if b.label != "none":
                    wk = weeks.split_week(b.label)[1]
                    lo, hi = str(wk), str(wk + 1)
            else:
                lo, hi = format(b.start, "g"), format(b.end, "g")
            w.writerow([LOCATION, name, "Bin", spec.units, lo, hi, f"{v:.6f}"])
    year, wk = weeks.split_week(issue)
    (outdir / f"EW{wk:02d}-{year}-{TEAM}.csv").write_text(out.getvalue())


def write_truth(outdir):
    season = weeks.season_weeks(SEASON)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Location", "Target", "Epiweek", "Value"])
    for issue in ISSUE_WEEKS:
        k = season.index(issue)
        for h in range(1, 5):
            obs = round(season_curve(season[k + h - 1]), 1)
            w.writerow([LOCATION, TARGET_NAMES[f"wili_{h}wk"], issue, obs])
    w.writerow([LOCATION, TARGET_NAMES["onset_week"], "", season[9]])
    w.writerow([LOCATION, TARGET_NAMES["peak_week"], "", season[17]])
    w.writerow([LOCATION, TARGET_NAMES["peak_intensity"], "", round(season_curve(season[17]), 1)])
    (outdir / "truth.csv").write_text(out.getvalue())


def write_windows(outdir):
    from multibin.evaluation import build_windows, windows_to_csv

    season = weeks.season_weeks(SEASON)
    wins = build_windows(ISSUE_WEEKS, onset_week=season[9], below_baseline_week=season[24])
    (outdir / "windows.csv").write_text(windows_to_csv(wins))


if __name__ == "__main__":
    sub = OUT / "submissions"
    sub.mkdir(parents=True, exist_ok=True)
    for f in sub.glob("*.csv"):
        f.unlink()
    for issue in ISSUE_WEEKS:
        write_week(issue, sub)
    write_truth(OUT)
    write_windows(OUT)
    print(f"wrote {len(ISSUE_WEEKS)} submissions to {sub}")
