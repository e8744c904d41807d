"""Tests for the evaluation protocol: cases, simulated feedback, metrics."""

import numpy as np
import pytest

from aid.data import TopicLabels, ValidationError
from aid.disambiguation import ClusterSet, FeedbackSelection
from aid.evaluation import TestCase as EvalCase
from aid.evaluation import (
    EvalConfig,
    average_precision,
    case_seed,
    hard_selection_rerank,
    make_test_cases,
    precision_at,
    precision_curve,
    preview_precision,
    run_experiment,
    simulate_multi,
    simulate_single,
)
from aid.rerank import RankedList
from aid.retrieval import NeighborSet
from aid.synthetic import topic_mixture


def labels_of(assignments, n_topics=None):
    if n_topics is None:
        n_topics = 1 + max((t for a in assignments for t in a), default=0)
    return TopicLabels(topics=[f"t{i}" for i in range(n_topics)], assignments=assignments)


def clusters_with_previews(previews, preview_distances=None, k=None):
    previews = [np.asarray(p, dtype=np.int64) for p in previews]
    k = k or len(previews)
    if preview_distances is None:
        preview_distances = [np.arange(1, p.size + 1, dtype=float) for p in previews]
    else:
        preview_distances = [np.asarray(d, dtype=float) for d in preview_distances]
    total = sum(p.size for p in previews)
    return ClusterSet(
        assignments=np.zeros(total, dtype=np.int64),
        centroids=np.zeros((k, 2)),
        k=k,
        r=10,
        members=previews,
        previews=previews,
        preview_distances=preview_distances,
    )


class TestMakeTestCases:
    def test_enumeration(self):
        labels = labels_of([[0], [0, 1], []], n_topics=2)
        cases = make_test_cases(labels)
        assert len(cases) == 3
        assert {(c.query_index, c.target_topic) for c in cases} == {(0, 0), (1, 0), (1, 1)}

    def test_five_topics_five_cases(self):
        labels = labels_of([[0, 1, 2, 3, 4]], n_topics=5)
        assert len(make_test_cases(labels)) == 5

    def test_mirflickr_scale_counting(self):
        # 12,681 labeled items averaging ~2 topics (capped at 5) must yield
        # exactly 25,002 cases: one per (item, topic) assignment
        rng = np.random.default_rng(0)
        n_labeled = 12681
        total = 25002
        counts = np.ones(n_labeled, dtype=int)
        remaining = total - n_labeled
        while remaining > 0:
            i = int(rng.integers(n_labeled))
            if counts[i] < 5:
                counts[i] += 1
                remaining -= 1
        assignments = [list(range(c)) for c in counts] + [[] for _ in range(300)]
        labels = labels_of(assignments, n_topics=5)
        assert sum(counts) == total
        assert len(make_test_cases(labels)) == total

    def test_no_labeled_items_is_error(self):
        with pytest.raises(ValidationError):
            make_test_cases(labels_of([[], []], n_topics=1))

    def test_case_requires_exactly_one_query_form(self):
        with pytest.raises(ValidationError):
            EvalCase(target_topic=0)
        with pytest.raises(ValidationError):
            EvalCase(target_topic=0, query_index=1, query_vector=np.zeros(2))


class TestPreviewPrecision:
    def test_counting(self):
        labels = labels_of([[0]] * 7 + [[]] * 3)
        assert preview_precision(np.arange(10), 0, labels) == pytest.approx(0.7)

    def test_all_relevant(self):
        labels = labels_of([[0]] * 4)
        assert preview_precision(np.arange(4), 0, labels) == 1.0

    def test_none_relevant(self):
        labels = labels_of([[], [], []], n_topics=1)
        assert preview_precision(np.arange(3), 0, labels) == 0.0

    def test_empty_preview_is_zero(self):
        labels = labels_of([[0]])
        assert preview_precision(np.array([], dtype=int), 0, labels) == 0.0


class TestSimulateSingle:
    def test_argmax(self):
        labels = labels_of([[], [0], [0], [0], [], [0], [], [], [], []])
        cs = clusters_with_previews([[0, 4], [1, 2, 3, 5, 6], [7, 8]])
        case = EvalCase(target_topic=0, query_index=1)
        sel = simulate_single(cs, case, labels)
        assert sel.selected == {1}

    def test_all_zero_still_selects_one(self):
        labels = labels_of([[], [], [], []], n_topics=1)
        cs = clusters_with_previews(
            [[0, 1], [2, 3]], preview_distances=[[0.9, 1.0], [0.3, 0.5]]
        )
        sel = simulate_single(cs, EvalCase(target_topic=0, query_index=0), labels)
        assert sel.selected == {1}  # tie on precision 0, cluster 1 previews closer

    def test_tie_broken_by_nearest_preview_then_id(self):
        labels = labels_of([[0], [0], [], []])
        cs = clusters_with_previews(
            [[0, 2], [1, 3]], preview_distances=[[0.8, 0.9], [0.2, 0.4]]
        )
        sel = simulate_single(cs, EvalCase(target_topic=0, query_index=0), labels)
        assert sel.selected == {1}
        cs2 = clusters_with_previews(
            [[0, 2], [1, 3]], preview_distances=[[0.5, 0.9], [0.5, 0.8]]
        )
        sel2 = simulate_single(cs2, EvalCase(target_topic=0, query_index=0), labels)
        assert sel2.selected == {0}


class TestSimulateMulti:
    def test_threshold_inclusive(self):
        labels = labels_of([[0], [], [0], [], [0], [0], [0], [], [0], [0]])
        cs = clusters_with_previews([[0, 1], [2, 3, 4, 5, 6], [7, 8]])
        # precisions: 0.5, 0.8, 0.5
        sel = simulate_multi(cs, EvalCase(target_topic=0, query_index=0), labels)
        assert sel.selected == {0, 1, 2}

    def test_all_below_threshold_empty(self):
        labels = labels_of([[], [], [], []], n_topics=1)
        cs = clusters_with_previews([[0, 1], [2, 3]])
        sel = simulate_multi(cs, EvalCase(target_topic=0, query_index=0), labels)
        assert not sel
        assert sel.ell == 0

    def test_above_one_threshold_selects_nothing(self):
        labels = labels_of([[0], [0], [0], [0]])
        cs = clusters_with_previews([[0, 1], [2, 3]])
        sel = simulate_multi(
            cs, EvalCase(target_topic=0, query_index=0), labels, threshold=1.0 + 1e-9
        )
        assert not sel


class TestHardSelection:
    def ranked(self, order):
        order = np.asarray(order, dtype=np.int64)
        d = np.arange(1, order.size + 1, dtype=float)
        return RankedList(order=order, delta=d, sigma=np.zeros_like(d), delta_tilde=d.copy())

    def neighbors(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return NeighborSet(
            indices=indices,
            distances=np.arange(1, indices.size + 1, dtype=float),
            directions=np.tile([1.0, 0.0], (indices.size, 1)),
            usable=np.ones(indices.size, dtype=bool),
        )

    def test_stable_partition(self):
        baseline = self.ranked([10, 11, 12, 13, 14])
        nbrs = self.neighbors([10, 11, 12, 13])
        cs = clusters_with_previews([[11, 13], [10, 12]])
        out = hard_selection_rerank(baseline, nbrs, cs, FeedbackSelection({0}))
        np.testing.assert_array_equal(out.order, [11, 13, 10, 12, 14])

    def test_select_everything_keeps_baseline_prefix(self):
        baseline = self.ranked([3, 1, 4, 5, 9])
        nbrs = self.neighbors([3, 1, 4, 5])
        cs = clusters_with_previews([[3, 4], [1, 5]])
        out = hard_selection_rerank(baseline, nbrs, cs, FeedbackSelection({0, 1}))
        np.testing.assert_array_equal(out.order, baseline.order)

    def test_matches_three_pass_oracle(self):
        rng = np.random.default_rng(1)
        order = rng.permutation(40)
        baseline = self.ranked(order)
        nb_idx = order[rng.permutation(40)[:15]]
        nbrs = self.neighbors(nb_idx)
        half = rng.permutation(15)
        members = [nb_idx[half[:7]], nb_idx[half[7:]]]
        cs = clusters_with_previews(members)
        sel = FeedbackSelection({1})
        out = hard_selection_rerank(baseline, nbrs, cs, sel)
        chosen = set(members[1].tolist())
        neighborhood = set(nb_idx.tolist())
        expected = (
            [i for i in order if i in chosen]
            + [i for i in order if i in neighborhood and i not in chosen]
            + [i for i in order if i not in neighborhood]
        )
        np.testing.assert_array_equal(out.order, expected)
        assert sorted(out.order) == sorted(baseline.order)

    def test_empty_selection_rejected(self):
        baseline = self.ranked([0, 1])
        nbrs = self.neighbors([0, 1])
        cs = clusters_with_previews([[0], [1]])
        with pytest.raises(ValidationError):
            hard_selection_rerank(baseline, nbrs, cs, FeedbackSelection())


class TestMetrics:
    def test_perfect_ranking(self):
        assert average_precision([0, 1, 2, 3], {0, 1}) == 1.0

    def test_single_relevant_at_rank_two(self):
        assert average_precision([5, 9], {9}) == pytest.approx(0.5)

    def test_matches_definitional_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            order = rng.permutation(30)
            relevant = set(rng.choice(30, size=7, replace=False).tolist())
            got = average_precision(order, relevant)
            hits = 0
            acc = 0.0
            for rank, idx in enumerate(order, start=1):
                if int(idx) in relevant:
                    hits += 1
                    acc += hits / rank
            assert abs(got - acc / len(relevant)) < 1e-12

    def test_empty_relevant_rejected(self):
        with pytest.raises(ValidationError):
            average_precision([0, 1], set())

    def test_precision_at_counting(self):
        order = list(range(10))
        assert precision_at(order, {0, 2, 4, 6}, 10) == pytest.approx(0.4)
        assert precision_at(order, {0}, 1) == 1.0

    def test_precision_at_clamps_with_warning(self):
        with pytest.warns(UserWarning):
            val = precision_at([0, 1], {0}, 100)
        assert val == pytest.approx(0.5)

    def test_curve_matches_pointwise(self):
        rng = np.random.default_rng(3)
        order = rng.permutation(150)
        relevant = set(rng.choice(150, size=40, replace=False).tolist())
        curve = precision_curve(order, relevant, 100)
        assert curve.shape == (100,)
        for kappa in (1, 7, 50, 100):
            assert curve[kappa - 1] == pytest.approx(precision_at(order, relevant, kappa))

    def test_permutation_consistency(self):
        rng = np.random.default_rng(4)
        order = rng.permutation(25)
        relevant = {3, 8, 17}
        relabel = rng.permutation(1000)[:25]
        mapped_order = relabel[order]
        mapped_rel = {int(relabel[i]) for i in relevant}
        assert average_precision(order, relevant) == pytest.approx(
            average_precision(mapped_order, mapped_rel)
        )
        np.testing.assert_allclose(
            precision_curve(order, relevant, 25),
            precision_curve(mapped_order, mapped_rel, 25),
        )

    def test_ap_reconstructed_from_precision_at_relevant_ranks(self):
        rng = np.random.default_rng(5)
        order = rng.permutation(40)
        relevant = set(rng.choice(40, size=9, replace=False).tolist())
        ranks = [r for r, idx in enumerate(order, start=1) if int(idx) in relevant]
        mean_p = np.mean([precision_at(order, relevant, r) for r in ranks])
        assert average_precision(order, relevant) == pytest.approx(mean_p, abs=1e-12)


@pytest.fixture(scope="module")
def small_dataset():
    store, labels, _ = topic_mixture(n_topics=3, per_topic=30, dim=8, seed=1)
    return store, labels


class TestRunExperiment:

    def test_baseline_only_matches_direct_evaluation(self, small_dataset):
        store, labels = small_dataset
        cfg = EvalConfig(m=20, repetitions=1, methods=("baseline",), kappa_max=20)
        cases = make_test_cases(labels)[:10]
        report = run_experiment(store, labels, cfg, cases=cases)
        from aid.retrieval import distances_to, ranking_order

        aps = []
        for case in cases:
            q = store.doubles()[case.query_index]
            dist = distances_to(store.doubles(), q, case.query_index)
            order = ranking_order(dist)
            relevant = np.flatnonzero(labels.topic_mask(case.target_topic))
            relevant = relevant[relevant != case.query_index]
            aps.append(average_precision(order, relevant))
        assert report.methods["baseline"].map_mean == pytest.approx(np.mean(aps))

    def test_reproducible_for_seed(self, small_dataset):
        store, labels = small_dataset
        cfg = EvalConfig(m=15, repetitions=2, seed=42, kappa_max=10)
        cases = make_test_cases(labels)[:6]
        a = run_experiment(store, labels, cfg, cases=cases)
        b = run_experiment(store, labels, cfg, cases=cases)
        for method in cfg.methods:
            assert a.methods[method].map_per_rep == b.methods[method].map_per_rep
            np.testing.assert_array_equal(
                a.methods[method].p_at_per_rep, b.methods[method].p_at_per_rep
            )

    def test_report_serialization(self, small_dataset, tmp_path):
        store, labels = small_dataset
        cfg = EvalConfig(m=10, repetitions=2, kappa_max=15)
        report = run_experiment(store, labels, cfg, cases=make_test_cases(labels)[:4])
        json_path = tmp_path / "report.json"
        csv_path = tmp_path / "report.csv"
        report.write_json(json_path)
        report.write_csv(csv_path)
        import csv as csv_mod
        import json as json_mod

        blob = json_mod.loads(json_path.read_text())
        assert set(blob["methods"]) == set(cfg.methods)
        for method in cfg.methods:
            entry = blob["methods"][method]
            assert len(entry["p_at"]) == 15
            assert len(entry["per_rep"]["mAP"]) == 2
            assert 0.0 <= entry["mAP"] <= 1.0
        rows = list(csv_mod.reader(csv_path.read_text().splitlines()))
        assert rows[0] == ["method", "metric", "kappa", "value"]
        p_rows = [r for r in rows if r[1] == "p_at"]
        assert len(p_rows) == 15 * len(cfg.methods)

    def test_metric_values_in_range(self, small_dataset):
        store, labels = small_dataset
        cfg = EvalConfig(m=12, repetitions=1, kappa_max=25)
        report = run_experiment(store, labels, cfg, cases=make_test_cases(labels)[:8])
        for res in report.methods.values():
            assert 0.0 <= res.map_mean <= 1.0
            assert np.all(res.p_at >= 0.0) and np.all(res.p_at <= 1.0)
            assert res.p_at.shape == (25,)

    def test_case_seed_deterministic_and_distinct(self):
        assert case_seed(0, 1, 2) == case_seed(0, 1, 2)
        seeds = {case_seed(0, r, c) for r in range(3) for c in range(10)}
        assert len(seeds) == 30

    def test_multi_mode_runs(self, small_dataset):
        store, labels = small_dataset
        cfg = EvalConfig(m=12, repetitions=1, feedback_mode="multi", kappa_max=10)
        report = run_experiment(store, labels, cfg, cases=make_test_cases(labels)[:5])
        assert "aid" in report.methods

    def test_invalid_config_rejected(self):
        with pytest.raises(ValidationError):
            EvalConfig(feedback_mode="other")
        with pytest.raises(ValidationError):
            EvalConfig(methods=("baseline", "magic"))
