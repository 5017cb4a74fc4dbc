import logging
import subprocess
import sys

import numpy as np
import pytest

from multibin import evaluation as ev
from multibin.cli import SAMPLE_DIR, main
from multibin.flusight import TARGET_NAMES, load_submissions, parse_submission, parse_truth
from multibin.scoring import LOG, ScoreRule

SUBS = SAMPLE_DIR / "submissions"
TRUTH = SAMPLE_DIR / "truth.csv"
WINDOWS = SAMPLE_DIR / "windows.csv"
ONE_FILE = sorted(SUBS.glob("*.csv"))[0]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestExamples:
    def test_text_scores(self, capsys):
        code, out, _ = run(capsys, "examples")
        assert code == 0
        for v in ("-0.270", "0.000", "-0.447", "-0.375", "-0.637", "-0.462", "-0.417", "-0.256"):
            assert f"= {v}" in out
        assert out.count("blur(G) equals F: yes") == 3

    def test_csv_matches_library(self, capsys):
        from multibin.worked_examples import solve_all

        code, out, _ = run(capsys, "examples", "--format", "csv", "--precision", "6")
        assert code == 0
        for s in solve_all():
            assert f"{s.number},,expected_score_G,{s.score_g:.6f}" in out

    def test_repeatable(self, capsys):
        a = run(capsys, "examples")[1]
        b = run(capsys, "examples")[1]
        assert a == b


class TestScore:
    def test_matches_library(self, capsys, tmp_path):
        code, out, _ = run(capsys, "score", SUBS, "--truth", TRUTH, "--windows", WINDOWS, "--format", "csv", "--precision", "12")
        assert code == 0
        row = ev.evaluate_season(load_submissions(SUBS), parse_truth(TRUTH.read_text()), ev.parse_windows(WINDOWS.read_text()))
        means = {line.split(",")[2]: float(line.split(",")[4]) for line in out.splitlines() if ",mean," in line}
        for t in row.targets:
            assert means[TARGET_NAMES[t]] == pytest.approx(row.cells[t].mean, abs=1e-12)

    def test_log_rule_ignores_d(self, capsys, caplog):
        with caplog.at_level(logging.WARNING, logger="multibin"):
            code, out, _ = run(capsys, "score", SUBS, "--truth", TRUTH, "--windows", WINDOWS, "--rule", "log", "--d", "3")
        assert code == 0
        assert "ignored" in caplog.text
        plain = run(capsys, "score", SUBS, "--truth", TRUTH, "--windows", WINDOWS, "--rule", "log")[1]
        assert out == plain
        row = ev.evaluate_season(
            load_submissions(SUBS), parse_truth(TRUTH.read_text()), ev.parse_windows(WINDOWS.read_text()), ScoreRule(LOG)
        )
        assert f"{row.cells['wili_1wk'].mean:.3f}" in out

    def test_missing_file(self, capsys, caplog):
        code, _, _ = run(capsys, "score", "/nowhere/sub.csv", "--truth", TRUTH)
        assert code == 1
        assert "/nowhere/sub.csv" in caplog.text

    def test_malformed_input(self, capsys, tmp_path):
        bad = tmp_path / "EW50-2016-X.csv"
        bad.write_text("Location,Target\nUS National,1 wk ahead\n")
        assert run(capsys, "score", bad, "--truth", TRUTH)[0] == 1

    def test_repeatable(self, capsys):
        argv = ("score", SUBS, "--truth", TRUTH, "--windows", WINDOWS)
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestHedge:
    def test_same_shape(self, capsys, tmp_path):
        out_path, report, plot = tmp_path / "h.csv", tmp_path / "r.csv", tmp_path / "p.csv"
        code, _, _ = run(capsys, "hedge", ONE_FILE, "-o", out_path, "--report", report, "--plot-data", plot)
        assert code == 0
        a, b = ONE_FILE.read_text().splitlines(), out_path.read_text().splitlines()
        assert len(a) == len(b)
        assert [x.rsplit(",", 1)[0] for x in a] == [y.rsplit(",", 1)[0] for y in b]
        hedged = parse_submission(out_path.read_text())
        assert len(hedged) == len(parse_submission(ONE_FILE.read_text()))
        gains = [float(line.rsplit(",", 1)[1]) for line in report.read_text().splitlines()[1:]]
        assert min(gains) >= 0
        assert "series" in plot.read_text().splitlines()[0]

    def test_matches_library(self, capsys, tmp_path):
        out_path = tmp_path / "h.csv"
        run(capsys, "hedge", ONE_FILE, "-o", out_path, "--report", tmp_path / "r.csv")
        lib = ev.hedge_season(parse_submission(ONE_FILE.read_text(), issue_week="2017-EW01"))
        cli = parse_submission(out_path.read_text(), issue_week="2017-EW01")
        for x, y in zip(lib, cli):
            np.testing.assert_allclose(x.forecast.probs, y.forecast.probs, atol=1e-15)

    def test_point_mass_unchanged(self, capsys, tmp_path):
        lines = ["Location,Target,Type,Unit,Bin_start_incl,Bin_end_notincl,Value"]
        for k in range(131):
            lo, hi = (f"{k / 10:g}", f"{(k + 1) / 10:g}") if k < 130 else ("13", "100")
            lines.append(f"US National,1 wk ahead,Bin,percent,{lo},{hi},{1 if k == 25 else 0}")
        src = tmp_path / "EW50-2016-X.csv"
        src.write_text("\n".join(lines) + "\n")
        out_path = tmp_path / "h.csv"
        assert run(capsys, "hedge", src, "-o", out_path)[0] == 0
        rec, = parse_submission(out_path.read_text())
        assert rec.forecast.probs[25] == 1.0

    def test_strict_non_convergence(self, capsys, tmp_path):
        code, _, _ = run(capsys, "hedge", ONE_FILE, "-o", tmp_path / "h.csv", "--max-iter", "2", "--strict")
        assert code == 2

    def test_lenient_non_convergence(self, capsys, tmp_path):
        with pytest.warns(RuntimeWarning):
            code, _, _ = run(capsys, "hedge", ONE_FILE, "-o", tmp_path / "h.csv", "--max-iter", "2")
        assert code == 0


class TestBlurAndTable:
    def test_blur(self, capsys):
        code, out, _ = run(capsys, "blur", "0,0,0.25,0.5,0.25,0,0")
        assert code == 0
        assert out.split() == ["0.000", "0.083", "0.250", "0.333", "0.250", "0.083", "0.000"]

    def test_blur_needs_padding(self, capsys):
        assert run(capsys, "blur", "0.5", "0.5")[0] == 1
        assert run(capsys, "blur", "0.5", "0.5", "--pad")[1].split() == ["0.167", "0.333", "0.333", "0.167"]

    def test_table1_sample(self, capsys, tmp_path):
        log_path = tmp_path / "scores.csv"
        code, out, _ = run(capsys, "table1", "--sample", "--score-log", log_path)
        assert code == 0
        assert "original forecasts" in out and "n scored" in out
        assert log_path.read_text().startswith("team,location,target,week,score_original,score_hedged")

    def test_table1_needs_inputs(self, capsys):
        assert run(capsys, "table1")[0] == 1


def test_entry_point_subprocess():
    res = subprocess.run([sys.executable, "-m", "multibin.cli", "examples"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "-0.256" in res.stdout
