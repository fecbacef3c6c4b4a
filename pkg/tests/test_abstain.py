import numpy as np
import pytest

from concest.abstain import (PredictionRecord, abstain_at_threshold, coverage_curve,
                             load_predictions, write_curve_csv)
from concest.errors import EmptyRetainedError, FormatError, UnknownIdError


def _records(clean, robust):
    return [PredictionRecord(str(i), bool(c), bool(r))
            for i, (c, r) in enumerate(zip(clean, robust))]


def _scores(values):
    return {str(i): float(v) for i, v in enumerate(values)}


class TestLoadPredictions:
    def test_well_formed(self, tmp_path):
        p = tmp_path / "preds.csv"
        p.write_text("id,clean_correct,robust_correct\na,1,0\nb,0,0\nc,1,1\n")
        recs = load_predictions(p)
        assert len(recs) == 3
        assert recs[0] == PredictionRecord("a", True, False)

    def test_bad_value(self, tmp_path):
        p = tmp_path / "preds.csv"
        p.write_text("id,clean_correct,robust_correct\na,2,0\n")
        with pytest.raises(FormatError, match="0 or 1"):
            load_predictions(p)

    def test_unknown_id(self, tmp_path):
        p = tmp_path / "preds.csv"
        p.write_text("id,clean_correct,robust_correct\nzz,1,0\n")
        with pytest.raises(UnknownIdError, match="zz"):
            load_predictions(p, known_ids=["a", "b"])


class TestAbstainAtThreshold:
    def test_infinite_tau_keeps_everything(self):
        recs = _records([1, 0, 1, 1], [0, 0, 1, 1])
        rep = abstain_at_threshold(recs, _scores([0.1, 0.2, 0.3, 0.4]), np.inf)
        assert rep.retained_count == 4
        assert rep.clean_accuracy_retained == rep.clean_accuracy_all == 0.75
        assert rep.robust_accuracy_retained == rep.robust_accuracy_all == 0.5

    def test_wrong_examples_abstained(self):
        clean = [1] * 8 + [0, 0]
        recs = _records(clean, clean)
        scores = _scores([0.1] * 8 + [1.5, 1.8])
        rep = abstain_at_threshold(recs, scores, 0.7)
        assert rep.abstained_count == 2
        assert rep.clean_accuracy_retained == 1.0
        assert rep.robust_accuracy_retained == 1.0

    def test_ceiling_formula(self):
        # 2% abstention with 59.5% overall robust accuracy
        robust = [1] * 595 + [0] * 405
        recs = _records([1] * 1000, robust)
        scores = _scores([0.1] * 980 + [0.9] * 20)
        rep = abstain_at_threshold(recs, scores, 0.7)
        assert rep.abstained_count == 20
        assert rep.ceiling == pytest.approx(0.595 / (1 - 0.02), abs=1e-12)
        assert round(rep.ceiling, 3) == 0.607

    def test_conservation(self, rng):
        recs = _records(rng.integers(0, 2, 50), rng.integers(0, 2, 50))
        scores = _scores(rng.uniform(0, 2, 50))
        rep = abstain_at_threshold(recs, scores, 1.0)
        clean_total = sum(r.clean_correct for r in recs)
        retained = [r for r in recs if scores[r.id] <= 1.0]
        abstained = [r for r in recs if scores[r.id] > 1.0]
        assert sum(r.clean_correct for r in retained) + \
               sum(r.clean_correct for r in abstained) == clean_total
        assert rep.retained_count + rep.abstained_count == 50

    def test_empty_retained(self):
        recs = _records([1], [1])
        with pytest.raises(EmptyRetainedError):
            abstain_at_threshold(recs, _scores([1.5]), 0.5)


class TestCoverageCurve:
    def test_full_fraction_equals_overall(self, rng):
        recs = _records(rng.integers(0, 2, 30), rng.integers(0, 2, 30))
        scores = _scores(rng.uniform(0, 2, 30))
        for order in ("lowest_first", "highest_first"):
            rows = coverage_curve(recs, scores, order, [1.0])
            assert rows[0][2] == pytest.approx(np.mean([r.clean_correct for r in recs]))
            assert rows[0][3] == pytest.approx(np.mean([r.robust_correct for r in recs]))

    def test_lowest_dominates_when_anticorrelated(self, rng):
        scores_arr = rng.uniform(0, 2, 40)
        med = np.median(scores_arr)
        correct = scores_arr < med
        recs = _records(correct, correct)
        scores = _scores(scores_arr)
        grid = [0.25, 0.5, 0.75, 1.0]
        low = coverage_curve(recs, scores, "lowest_first", grid)
        high = coverage_curve(recs, scores, "highest_first", grid)
        for lo, hi in zip(low, high):
            assert lo[3] >= hi[3]

    def test_monotone_retained_count(self, rng):
        recs = _records(rng.integers(0, 2, 25), rng.integers(0, 2, 25))
        scores = _scores(rng.uniform(0, 2, 25))
        grid = [0.2, 0.4, 0.6, 0.8, 1.0]
        rows = coverage_curve(recs, scores, "lowest_first", grid)
        cuts = [int(np.floor(f * 25)) for f in grid]
        assert cuts == sorted(cuts)
        # lu threshold at the cut is nondecreasing for lowest_first
        assert all(a[1] <= b[1] for a, b in zip(rows, rows[1:]))

    def test_tie_break_by_id(self):
        recs = _records([1, 0, 1], [1, 0, 1])
        scores = _scores([0.5, 0.5, 0.5])
        rows = coverage_curve(recs, scores, "lowest_first", [1 / 3])
        # ids '0','1','2' tie on score; id '0' sorts first
        assert rows[0][2] == 1.0

    def test_bad_fraction(self):
        recs = _records([1], [1])
        with pytest.raises(FormatError):
            coverage_curve(recs, _scores([0.1]), "lowest_first", [1.5])

    def test_csv(self, tmp_path, rng):
        recs = _records(rng.integers(0, 2, 10), rng.integers(0, 2, 10))
        rows = coverage_curve(recs, _scores(rng.uniform(0, 2, 10)), "lowest_first", [0.5, 1.0])
        out = tmp_path / "curve.csv"
        write_curve_csv(out, rows)
        lines = out.read_text().splitlines()
        assert lines[0] == "fraction,lu_cut,clean_accuracy,robust_accuracy"
        assert len(lines) == 3
