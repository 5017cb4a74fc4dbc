import math
import random

import numpy as np
import pytest

from multibin import weeks
from multibin.errors import DuplicateForecast, MissingForecast, MissingTruth, ShapeMismatch
from multibin.evaluation import (
    Cell,
    EvaluationWindow,
    ScoreRow,
    build_windows,
    compare_table,
    evaluate_season,
    hedge_season,
    parse_windows,
    score_record,
    season_milestones,
    table_to_csv,
    table_to_text,
    windows_to_csv,
)
from multibin.flusight import ForecastRecord, TruthRecord, target_spec
from multibin.forecast import TARGET_IDS, CategoricalForecast
from multibin.scoring import LOG, MULTIBIN_LOG, ScoreRule, expected_score

ORIGINAL_ROW = (-0.30, -0.81, -0.85, -0.89, -0.39, -0.48, -0.62)
HEDGED_ROW = (-0.19, -0.75, -0.78, -0.84, -0.33, -0.43, -0.59)


def row(label, values, count=10):
    return ScoreRow(label, {t: Cell(v, count) for t, v in zip(TARGET_IDS, values)})


def wili_record(rng, week, target="wili_1wk", location="US National", sharp=False):
    spec = target_spec(target)
    n = len(spec.bins)
    if sharp:
        p = np.zeros(n)
        p[int(rng.integers(10, 40))] = 1.0
    else:
        centre = rng.uniform(10, 40)
        p = np.exp(-0.5 * ((np.arange(n) - centre) / rng.uniform(1, 5)) ** 2)
    f = CategoricalForecast.from_probs(p / p.sum(), labels=spec.labels)
    return ForecastRecord("T", location, target, week, f)


def season_fixture(rng, n_weeks=6, locations=("US National",)):
    ws = weeks.season_weeks(2016)[8 : 8 + n_weeks]
    recs, truth = [], []
    for loc in locations:
        for w in ws:
            recs.append(wili_record(rng, w, location=loc))
            x = round(float(rng.uniform(1, 4)), 1)
            truth.append(TruthRecord(loc, "wili_1wk", x, int(round(x * 10)), w))
    return ws, recs, truth


class TestEvaluateSeason:
    def test_single_forecast_cell(self, rng):
        ws, recs, truth = season_fixture(rng, 1)
        rule = ScoreRule(MULTIBIN_LOG, 5)
        out = evaluate_season(recs, truth, [EvaluationWindow("wili_1wk", tuple(ws))], rule)
        assert out.cells["wili_1wk"].mean == score_record(recs[0], truth[0].resolved_bin, rule)
        assert out.cells["wili_1wk"].count == 1

    def test_ignores_weeks_outside_window(self, rng):
        ws, recs, truth = season_fixture(rng, 6)
        out = evaluate_season(recs, truth, [EvaluationWindow("wili_1wk", tuple(ws[2:4]))])
        assert out.cells["wili_1wk"].count == 2
        assert [s.issue_week for s in out.scored] == ws[2:4]

    def test_window_without_forecasts(self, rng):
        ws, recs, truth = season_fixture(rng, 3)
        with pytest.raises(MissingForecast):
            evaluate_season(recs, truth, [EvaluationWindow("wili_1wk", ("2017-EW15",))])

    def test_empty_window_refused(self):
        with pytest.raises(ValueError):
            EvaluationWindow("wili_1wk", ())

    def test_missing_truth(self, rng):
        ws, recs, truth = season_fixture(rng, 3)
        with pytest.raises(MissingTruth):
            evaluate_season(recs, truth[:-1], [EvaluationWindow("wili_1wk", tuple(ws))])

    def test_duplicate_forecast(self, rng):
        ws, recs, truth = season_fixture(rng, 3)
        with pytest.raises(DuplicateForecast):
            evaluate_season(recs + recs[:1], truth, [EvaluationWindow("wili_1wk", tuple(ws))])

    def test_minus_inf_propagates(self, rng):
        ws, recs, truth = season_fixture(rng, 3)
        far = [TruthRecord(t.location, t.target_id, 12.5, 125, t.issue_week) for t in truth]
        out = evaluate_season(recs, far, [EvaluationWindow("wili_1wk", tuple(ws))], ScoreRule(LOG))
        assert out.cells["wili_1wk"].mean == -math.inf

    def test_deterministic_and_order_free(self, rng):
        ws, recs, truth = season_fixture(rng, 12, locations=("US National", "HHS Region 1"))
        win = [EvaluationWindow("wili_1wk", tuple(ws))]
        base = evaluate_season(recs, truth, win)
        again = evaluate_season(recs, truth, win)
        assert base.cells == again.cells
        shuffler = random.Random(7)
        for _ in range(5):
            r, t = recs[:], truth[:]
            shuffler.shuffle(r)
            shuffler.shuffle(t)
            assert evaluate_season(r, t, win).cells == base.cells

    def test_location_specific_window(self, rng):
        ws, recs, truth = season_fixture(rng, 4, locations=("US National", "HHS Region 1"))
        out = evaluate_season(recs, truth, [EvaluationWindow("wili_1wk", tuple(ws[:2]), "HHS Region 1")])
        assert out.cells["wili_1wk"].count == 2


class TestHedgeSeason:
    def test_point_masses_unchanged(self, rng):
        recs = [wili_record(rng, w, sharp=True) for w in weeks.season_weeks(2016)[:5]]
        for a, b in zip(recs, hedge_season(recs)):
            np.testing.assert_allclose(b.forecast.probs, a.forecast.probs, atol=1e-9)

    def test_keeps_grid_and_gains_in_expectation(self, rng):
        recs = [wili_record(rng, w) for w in weeks.season_weeks(2016)[:4]]
        mb, lg = ScoreRule(MULTIBIN_LOG, 5), ScoreRule(LOG)
        for a, b in zip(recs, hedge_season(recs)):
            assert b.forecast.bin_labels == a.forecast.bin_labels
            assert expected_score(mb, b.forecast, a.forecast) >= expected_score(mb, a.forecast, a.forecast) - 1e-9
            # under the proper log score the hedge can only lose in expectation
            assert expected_score(lg, b.forecast, a.forecast) <= expected_score(lg, a.forecast, a.forecast) + 1e-12

    def test_onset_none_mass_kept(self):
        spec = target_spec("onset_week")
        p = np.zeros(len(spec.bins))
        p[8:12] = [0.2, 0.3, 0.2, 0.1]
        p[-1] = 0.2
        rec = ForecastRecord("T", "US National", "onset_week", "2016-EW45", CategoricalForecast.from_probs(p, labels=spec.labels))
        out, = hedge_season([rec])
        assert out.forecast.probs[-1] == pytest.approx(0.2, abs=1e-12)

    def test_parallel_matches_serial(self, rng):
        recs = [wili_record(rng, w) for w in weeks.season_weeks(2016)[:6]]
        a = hedge_season(recs)
        b = hedge_season(recs, workers=2)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.forecast.probs, y.forecast.probs)


class TestCompareTable:
    def test_printed_rows_give_printed_gains(self):
        table = compare_table(row("original", ORIGINAL_ROW), row("hedged", HEDGED_ROW))
        got = [round(table.gains[t], 2) for t in TARGET_IDS]
        assert got == [0.11, 0.06, 0.07, 0.05, 0.06, 0.05, 0.03]

    def test_identical_rows(self):
        table = compare_table(row("original", ORIGINAL_ROW), row("hedged", ORIGINAL_ROW))
        assert all(g == 0.0 for g in table.gains.values())

    def test_shape_mismatch(self):
        short = ScoreRow("hedged", {t: Cell(-0.1, 10) for t in TARGET_IDS[:3]})
        with pytest.raises(ShapeMismatch):
            compare_table(row("original", ORIGINAL_ROW), short)
        with pytest.raises(ShapeMismatch):
            compare_table(row("original", ORIGINAL_ROW), row("hedged", HEDGED_ROW, count=9))

    def test_non_finite_gain_is_nan(self):
        vals = list(ORIGINAL_ROW)
        vals[0] = -math.inf
        table = compare_table(row("original", vals), row("hedged", HEDGED_ROW))
        assert math.isnan(table.gains["wili_1wk"])
        assert "-inf" in table_to_text(table)

    def test_renderings(self):
        table = compare_table(row("original", ORIGINAL_ROW), row("hedged", HEDGED_ROW))
        text = table_to_text(table)
        assert "0.11" in text and "peak intensity" in text
        lines = table_to_csv(table, precision=2).splitlines()
        assert lines[0].startswith("variant,wili_1wk")
        assert lines[1] == "original,-0.30,-0.81,-0.85,-0.89,-0.39,-0.48,-0.62"


class TestWindows:
    def test_build_windows(self):
        season = weeks.season_weeks(2016)
        onset, below = season[9], season[24]  # 2016-EW49, 2017-EW12
        ws = {w.target_id: w.included_issue_weeks for w in build_windows(season, onset, below)}
        assert ws["onset_week"][-1] == "2017-EW03"
        assert ws["peak_week"][-1] == below and ws["peak_intensity"] == ws["peak_week"]
        assert ws["wili_1wk"][0] == "2016-EW45" and ws["wili_1wk"][-1] == "2017-EW15"
        assert ws["onset_week"][0] == season[0]

    def test_no_onset_uses_whole_season(self):
        season = weeks.season_weeks(2016)
        ws = {w.target_id: w.included_issue_weeks for w in build_windows(season, None, None)}
        assert all(len(v) == 33 for v in ws.values())

    def test_csv_round_trip(self):
        season = weeks.season_weeks(2016)
        wins = build_windows(season, season[9], season[24])
        assert parse_windows(windows_to_csv(wins)) == wins

    def test_milestones(self):
        season = weeks.season_weeks(2016)
        values = [1.0] * 5 + [2.2, 1.9, 2.3, 2.4, 2.2] + [3.0] * 10 + [2.0] * 13
        onset, below = season_milestones(dict(zip(season, values)), baseline=2.2)
        assert onset == season[7]
        assert below == season[20]

    def test_milestones_no_onset(self):
        season = weeks.season_weeks(2016)
        assert season_milestones(dict(zip(season, [1.0] * 33)), baseline=2.2) == (None, None)
