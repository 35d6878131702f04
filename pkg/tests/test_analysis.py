import csv
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from emprobe.analysis import (
    confusion,
    information_gain,
    make_report,
    metrics,
    rank_dimensions,
)
from emprobe.analysis.infogain import label_entropy, write_ranking
from emprobe.analysis.metrics import ConfusionCounts, Metrics, f1_score
from emprobe.analysis.pruning import kept_dimensions, prune_experiment
from emprobe.analysis.report import (
    BEST,
    SECOND,
    percent,
    render_markdown,
    write_report_csv,
)
from emprobe.reference import (
    REFERENCE_AVERAGES,
    REFERENCE_DATASET_SIZES,
    classifier_results,
    handcrafted_results,
)
from emprobe.svm import GridSpec
from oracles import brute_metrics, exhaustive_ig

class TestConfusion:
    def test_all_correct_positives(self):
        assert confusion([1] * 5, [1] * 5) == ConfusionCounts(5, 0, 0, 0)

    def test_inverted(self):
        c = confusion([1, -1, 1, -1], [-1, 1, -1, 1])
        assert c.tp == c.tn == 0 and c.fp == 2 and c.fn == 2

    def test_hand_tally(self):
        pred = [1, 1, -1, -1, 1, -1, 1, 1, -1, -1, 1, -1, 1, -1, -1, 1, 1, -1, 1, -1]
        true = [1, -1, -1, 1, 1, -1, -1, 1, -1, 1, 1, -1, 1, 1, -1, -1, 1, -1, 1, -1]
        assert confusion(pred, true) == ConfusionCounts(tp=7, tn=7, fp=3, fn=3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            confusion([1], [1, -1])

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_matches_brute_force(self, data):
        n = data.draw(st.integers(1, 80))
        pred = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
        true = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
        counts, exact = brute_metrics(pred, true)
        c = confusion(pred, true)
        assert (c.tp, c.tn, c.fp, c.fn) == counts
        m = metrics(c)
        for got, want in zip((m.accuracy, m.precision, m.recall, m.f1), exact):
            assert abs(got - float(want)) <= 1e-12


class TestMetrics:
    def test_published_triple(self):
        assert f1_score(0.9462, 0.9685) == pytest.approx(0.9572, abs=1e-4)

    def test_perfect(self):
        m = metrics(ConfusionCounts(3, 4, 0, 0))
        assert m == Metrics(1.0, 1.0, 1.0, 1.0)

    def test_no_positive_predictions(self):
        m = metrics(ConfusionCounts(0, 5, 0, 3))
        assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)

    def test_empty_counts(self):
        with pytest.raises(ValueError):
            metrics(ConfusionCounts(0, 0, 0, 0))

    @given(st.floats(0.01, 1), st.floats(0.01, 1))
    def test_harmonic_forms_agree(self, p, r):
        assert f1_score(p, r) == pytest.approx(2 / (1 / p + 1 / r), rel=1e-12)


class TestInformationGain:
    def test_perfect_binary(self):
        ig, thr = information_gain([1, 1, 0, 0], [1, 1, -1, -1])
        assert ig == pytest.approx(1.0) and thr is None

    def test_constant(self):
        assert information_gain([3.0] * 6, [1, -1, 1, -1, 1, 1]) == (0.0, None)

    def test_binary_hand_fixture(self):
        col = [1] * 10 + [0] * 10
        lab = [1] * 8 + [-1] * 2 + [1] * 2 + [-1] * 8
        ig, _ = information_gain(col, lab)
        assert ig == pytest.approx(exhaustive_ig(col, lab), abs=1e-12)
        assert ig == pytest.approx(1 - 0.7219280948873623, abs=1e-12)

    def test_threshold_is_midpoint(self):
        ig, thr = information_gain([0.5, 1.5, 3.0, 4.0], [-1, -1, 1, 1])
        assert ig == pytest.approx(1.0) and thr == 2.25

    def test_smallest_threshold_on_ties(self):
        _, thr = information_gain([1.0, 2.0, 3.0, 4.0, 5.0], [-1, 1, 1, 1, -1])
        assert thr == 1.5

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_matches_exhaustive(self, data):
        n = data.draw(st.integers(1, 40))
        col = data.draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n))
        lab = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
        ig, _ = information_gain(col, lab)
        assert ig >= 0
        assert abs(ig - exhaustive_ig(col, lab)) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=40), st.randoms())
    def test_monotone_invariance(self, col, rnd):
        lab = [rnd.choice([-1, 1]) for _ in col]
        x = np.array(col, dtype=np.float64)
        # cubing must stay strictly increasing in floating point (no underflow ties)
        assume(len(np.unique(x ** 3)) == len(np.unique(x)))
        assume(not np.all((x == 0) | (x == 1)))
        assert information_gain(x, lab)[0] == pytest.approx(information_gain(x ** 3, lab)[0],
                                                            abs=1e-12)

    def test_label_entropy(self):
        assert label_entropy([1, -1]) == 1.0 and label_entropy([1, 1]) == 0.0


class TestRanking:
    def test_predictive_first(self):
        r = rank_dimensions(np.array([[5, 1], [5, 1], [5, 0], [5, 0]]), [1, 1, -1, -1])
        assert r.top(2) == [1, 0]

    def test_tie_lower_index(self):
        col = [1, 0, 1, 0]
        r = rank_dimensions(np.array([col, col, col]).T, [1, -1, 1, -1])
        assert r.order.tolist() == [0, 1, 2]

    def test_planted_dims(self):
        rng = np.random.default_rng(0)
        y = np.repeat([1, -1], 100)
        x = rng.standard_normal((200, 100))
        planted = [7, 23, 41, 66, 90]
        x[:, planted] += 2.0 * y[:, None]
        r = rank_dimensions(x, y)
        assert sorted(r.top(5)) == planted
        assert sorted(r.order.tolist()) == list(range(100))

    def test_write_ranking(self, tmp_path):
        r = rank_dimensions(np.array([[0.1, 1], [0.9, 0]]), [1, -1])
        p = tmp_path / "ig.csv"
        write_ranking(p, r, ["a", "b"])
        rows = list(csv.reader(p.open()))
        assert rows[0] == ["dim", "name", "ig_bits", "threshold"]
        assert rows[1][:3] == ["0", "a", "1.000000000"] and rows[2][3] == ""


class TestPruning:
    def data(self):
        rng = np.random.default_rng(4)
        y = np.repeat([1, -1], 40)
        x = rng.standard_normal((80, 8))
        x[:, [2, 5]] += 1.5 * y[:, None]
        idx = rng.permutation(80)
        x, y = x[idx], y[idx]
        return (x[:40], y[:40]), (x[40:60], y[40:60]), (x[60:], y[60:])

    def test_kept_dimensions(self):
        r = rank_dimensions(np.eye(4) * [1, 2, 3, 4], [1, -1, -1, -1])
        assert len(kept_dimensions(r, 0.25)) == 1
        assert kept_dimensions(r, 1.0) == [0, 1, 2, 3]
        with pytest.raises(ValueError, match="fraction"):
            kept_dimensions(r, 0.0)

    def test_quarter_keeps_ceil(self):
        r = rank_dimensions(np.random.default_rng(0).standard_normal((10, 100)),
                            [1, -1] * 5)
        assert len(kept_dimensions(r, 0.25)) == 25

    def test_full_fraction_is_identity(self):
        train, val, test = self.data()
        grid = GridSpec((1.0, 8.0), (0.125, 0.5))
        res = prune_experiment(train, val, test, 1.0, grid)
        assert res.kept_dims == list(range(8))
        assert res.metrics_pruned == res.metrics_full

    def test_pruned_keeps_informative(self):
        train, val, test = self.data()
        res = prune_experiment(train, val, test, 0.25, GridSpec((1.0, 8.0), (0.125, 0.5)))
        assert res.kept_dims == [2, 5]
        assert res.metrics_pruned.f1 >= res.metrics_full.f1 - 0.05


class TestReport:
    def test_percent_half_up(self):
        assert percent(0.99325) == Decimal("99.33")
        assert percent(0.9932) == Decimal("99.32")
        assert percent(float("nan")).is_nan()

    def test_single_row(self):
        t = make_report([("equals", "code2vec", Metrics(0.99, 0.99, 0.9964, 0.9932))])
        r = t.row("equals", "code2vec")
        assert r.f1 == Decimal("99.32") and r.mark == BEST
        assert t.schemes == ["code2vec"]

    @pytest.mark.parametrize("results", [handcrafted_results, classifier_results])
    def test_reproduces_published_averages(self, results):
        t = make_report(results())
        assert t.methods == list(REFERENCE_DATASET_SIZES)
        for row in t.averages:
            _, p, r, f = REFERENCE_AVERAGES[row.scheme]
            assert (float(row.precision), float(row.recall), float(row.f1)) == (p, r, f)

    def test_empty_scheme_omitted(self):
        t = make_report([("equals", "HC_Binary", Metrics(1, 1, 1, 1)),
                         ("main", "HC_Binary", Metrics(1, 1, 1, 1))])
        assert t.schemes == ["HC_Binary"]
        with pytest.raises(KeyError):
            t.row("equals", "code2vec")

    def test_marks(self):
        m = lambda f: Metrics(f, f, f, f)  # noqa: E731
        t = make_report([("run", "HC_Binary", m(0.8)), ("run", "HC_Norm", m(0.9)),
                         ("run", "code2vec", m(0.7)), ("get", "HC_Binary", m(0.5)),
                         ("get", "HC_Norm", m(0.5)), ("get", "code2vec", m(0.4))])
        assert [r.mark for r in t.rows if r.method == "run"] == [SECOND, BEST, ""]
        assert [r.mark for r in t.rows if r.method == "get"] == [BEST, BEST, ""]
        assert t.methods == ["run", "get"]

    def test_outputs(self, tmp_path):
        t = make_report(classifier_results())
        p = tmp_path / "r.csv"
        write_report_csv(p, t)
        rows = list(csv.DictReader(p.open()))
        assert len(rows) == 40 + 4
        assert rows[-1]["method"] == "average" and rows[-1]["f1"] == "93.24"
        md = render_markdown(t, "Classifiers")
        assert md.startswith("## Classifiers")
        assert "**93.24**" in md
        for part in md.split("## Average"):
            widths = {len(line) for line in part.splitlines() if line.startswith("|")}
            assert len(widths) == 1  # columns aligned

    def test_empty(self):
        with pytest.raises(ValueError):
            make_report([])
