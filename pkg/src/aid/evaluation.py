"""Evaluation harness: simulated-feedback protocol, ranking metrics, reports.

A test case is one (query, target topic) pair. For every case the harness
runs the baseline ranking, disambiguates the neighborhood, simulates the
user's cluster selection from preview precision, re-ranks with each method,
and scores the resulting permutation with average precision and P@kappa
against the items carrying the target topic. Repetitions re-seed the
clustering; everything is deterministic given (config, seed).
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import FeatureStore, TopicLabels, ValidationError
from .disambiguation import (
    ClusterSet,
    DisambiguationParams,
    FeedbackSelection,
    disambiguate,
)
from .rerank import RankedList, RerankParams, rerank_from_distances
from .retrieval import (
    NeighborSet,
    distances_to,
    neighbors_from_distances,
    ranking_order,
)

METHODS = ("baseline", "hard", "aid")
FEEDBACK_MODES = ("single", "multi")


@dataclass(frozen=True, eq=False)
class TestCase:
    """One evaluation query aimed at one target topic.

    Queries are either database items (query_index) or external vectors
    (query_vector); exactly one must be set.
    """

    target_topic: int
    query_index: int | None = None
    query_vector: np.ndarray | None = None

    def __post_init__(self):
        if (self.query_index is None) == (self.query_vector is None):
            raise ValidationError("set exactly one of query_index / query_vector")


def make_test_cases(labels: TopicLabels) -> list[TestCase]:
    """One case per (item, assigned topic) pair, over items with any topic."""
    cases = [
        TestCase(target_topic=t, query_index=i)
        for i, assigned in enumerate(labels.assignments)
        for t in assigned
    ]
    if not cases:
        raise ValidationError("no labeled items; cannot build test cases")
    return cases


def preview_precision(preview: np.ndarray, topic: int, labels: TopicLabels) -> float:
    """Fraction of preview items carrying the topic; 0 for an empty preview."""
    preview = np.asarray(preview, dtype=np.int64)
    if preview.size == 0:
        return 0.0
    mask = labels.topic_mask(topic)
    return float(mask[preview].mean())


def _cluster_precisions(clusters: ClusterSet, topic: int, labels: TopicLabels) -> list[float]:
    if clusters.previews is None:
        raise ValidationError("clusters carry no previews; run previews() first")
    return [preview_precision(p, topic, labels) for p in clusters.previews]


def simulate_single(
    clusters: ClusterSet, case: TestCase, labels: TopicLabels
) -> FeedbackSelection:
    """Forced single selection: the cluster with the highest preview precision.

    Ties go to the cluster whose nearest preview item is closest to the
    query, then to the lowest cluster id.
    """
    precisions = _cluster_precisions(clusters, case.target_topic, labels)
    nearest = [
        float(d[0]) if d.size else math.inf for d in clusters.preview_distances
    ]
    best = min(range(clusters.k), key=lambda c: (-precisions[c], nearest[c], c))
    return FeedbackSelection({best})


def simulate_multi(
    clusters: ClusterSet,
    case: TestCase,
    labels: TopicLabels,
    threshold: float = 0.5,
) -> FeedbackSelection:
    """All clusters whose preview precision reaches the threshold; may be empty."""
    precisions = _cluster_precisions(clusters, case.target_topic, labels)
    return FeedbackSelection(c for c, p in enumerate(precisions) if p >= threshold)


def hard_selection_rerank(
    baseline: RankedList,
    neighbors: NeighborSet,
    clusters: ClusterSet,
    selection: FeedbackSelection,
) -> RankedList:
    """Move the selected clusters' members to the top, preserving baseline order.

    Three stable tiers: selected members, the rest of the neighborhood, the
    rest of the database. Scores are passed through unchanged; only the
    permutation moves.
    """
    if not selection:
        raise ValidationError("hard selection needs a nonempty cluster selection")
    if clusters.members is None:
        raise ValidationError("clusters carry no membership; run previews() first")
    for c in selection.selected:
        if not 0 <= c < clusters.k:
            raise ValidationError(f"cluster id {c} out of range (k={clusters.k})")
    selected_members = np.concatenate(
        [clusters.members[c] for c in sorted(selection.selected)]
        or [np.empty(0, dtype=np.int64)]
    )
    tier = np.full(baseline.order.size, 2, dtype=np.int8)
    tier[np.isin(baseline.order, neighbors.indices)] = 1
    tier[np.isin(baseline.order, selected_members)] = 0
    perm = np.argsort(tier, kind="stable")
    return RankedList(
        order=baseline.order[perm],
        delta=baseline.delta[perm],
        sigma=baseline.sigma[perm],
        delta_tilde=baseline.delta_tilde[perm],
        beta=baseline.beta,
    )


def average_precision(order: np.ndarray, relevant) -> float:
    """Mean of precision-at-rank over the relevant ranks, normalized by the
    total relevant count."""
    relevant = np.asarray(sorted(relevant), dtype=np.int64)
    if relevant.size == 0:
        raise ValidationError("relevant set must be nonempty")
    order = np.asarray(order, dtype=np.int64)
    rel = np.isin(order, relevant)
    hits = np.cumsum(rel)
    ranks = np.arange(1, order.size + 1)
    return float((hits[rel] / ranks[rel]).sum() / relevant.size)


def precision_at(order: np.ndarray, relevant, kappa: int) -> float:
    """Fraction of relevant items among the top kappa (clamped to the list)."""
    if kappa < 1:
        raise ValidationError(f"kappa must be >= 1, got {kappa}")
    order = np.asarray(order, dtype=np.int64)
    if kappa > order.size:
        warnings.warn(
            f"kappa={kappa} exceeds ranking length {order.size}; "
            "computing over the available prefix"
        )
        kappa = order.size
    relevant = np.asarray(sorted(relevant), dtype=np.int64)
    top = order[:kappa]
    return float(np.isin(top, relevant).sum() / kappa)


def precision_curve(order: np.ndarray, relevant, kappa_max: int = 100) -> np.ndarray:
    """P@kappa for kappa = 1..kappa_max in one pass (clamped past the end)."""
    order = np.asarray(order, dtype=np.int64)
    relevant = np.asarray(sorted(relevant), dtype=np.int64)
    upto = min(kappa_max, order.size)
    rel = np.isin(order[:upto], relevant)
    curve = np.cumsum(rel) / np.arange(1, upto + 1)
    if upto < kappa_max:
        curve = np.concatenate([curve, np.full(kappa_max - upto, curve[-1] if upto else 0.0)])
    return curve


@dataclass
class EvalConfig:
    """Harness configuration; defaults follow the reference protocol."""

    m: int = 200
    eta: float | None = None
    cap: int = 10
    r: int = 10
    gamma: float = 1.0
    beta: float | None = None
    repetitions: int = 5
    methods: tuple[str, ...] = METHODS
    feedback_mode: str = "single"
    seed: int = 0
    exclude_query: bool = True
    kappa_max: int = 100
    multi_threshold: float = 0.5

    def __post_init__(self):
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ValidationError(f"feedback_mode must be one of {FEEDBACK_MODES}")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValidationError(f"unknown methods: {sorted(unknown)}")
        if self.repetitions < 1 or self.m < 1 or self.r < 1 or self.kappa_max < 1:
            raise ValidationError("m, r, repetitions, and kappa_max must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MethodResult:
    map_mean: float
    map_std: float
    map_per_rep: list[float]
    p_at: np.ndarray
    p_at_per_rep: np.ndarray


@dataclass
class EvalReport:
    methods: dict[str, MethodResult]
    repetitions: int
    n_cases: int
    config: dict
    skipped_cases: int = 0

    def to_dict(self) -> dict:
        return {
            "methods": {
                name: {
                    "mAP": res.map_mean,
                    "mAP_std": res.map_std,
                    "p_at": [float(v) for v in res.p_at],
                    "per_rep": {
                        "mAP": res.map_per_rep,
                        "p_at": [[float(v) for v in row] for row in res.p_at_per_rep],
                    },
                }
                for name, res in self.methods.items()
            },
            "repetitions": self.repetitions,
            "n_cases": self.n_cases,
            "skipped_cases": self.skipped_cases,
            "config": self.config,
        }

    def write_json(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    def write_csv(self, path: str | Path) -> None:
        """Delimited form: one row per (method, metric, kappa, value)."""
        with Path(path).open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow(["method", "metric", "kappa", "value"])
            for name, res in self.methods.items():
                w.writerow([name, "mAP", "", f"{res.map_mean:.10g}"])
                w.writerow([name, "mAP_std", "", f"{res.map_std:.10g}"])
                for rep, v in enumerate(res.map_per_rep):
                    w.writerow([name, "mAP_rep", rep, f"{v:.10g}"])
                for i, v in enumerate(res.p_at, start=1):
                    w.writerow([name, "p_at", i, f"{v:.10g}"])


def case_seed(seed: int, repetition: int, case_index: int) -> int:
    """Deterministic per-(seed, repetition, case) clustering seed."""
    return int(np.random.SeedSequence((seed, repetition, case_index)).generate_state(1)[0])


def _case_query(
    store: FeatureStore, case: TestCase, exclude_query: bool
) -> tuple[np.ndarray, int | None]:
    if case.query_index is not None:
        if not 0 <= case.query_index < store.n:
            raise ValidationError(f"query index {case.query_index} out of range")
        q = store.doubles()[case.query_index]
        return q, (case.query_index if exclude_query else None)
    return np.asarray(case.query_vector, dtype=np.float64), None


def run_experiment(
    store: FeatureStore,
    labels: TopicLabels,
    config: EvalConfig | None = None,
    cases: list[TestCase] | None = None,
) -> EvalReport:
    """Run the full simulated-feedback protocol and aggregate the metrics.

    Cases default to one per (item, topic) pair. Cases whose relevant set is
    empty after query exclusion are skipped and counted in the report.
    """
    config = config or EvalConfig()
    if cases is None:
        cases = make_test_cases(labels)
    if not cases:
        raise ValidationError("no test cases to evaluate")
    X = store.doubles()
    rerank_params = RerankParams(gamma=config.gamma, beta=config.beta)
    map_per_rep: dict[str, list[float]] = {m: [] for m in config.methods}
    curve_per_rep: dict[str, list[np.ndarray]] = {m: [] for m in config.methods}
    skipped = 0
    for rep in range(config.repetitions):
        ap_sums = {m: 0.0 for m in config.methods}
        curve_sums = {m: np.zeros(config.kappa_max) for m in config.methods}
        used = 0
        for ci, case in enumerate(cases):
            q, exclude = _case_query(store, case, config.exclude_query)
            relevant = np.flatnonzero(labels.topic_mask(case.target_topic))
            if exclude is not None:
                relevant = relevant[relevant != exclude]
            if relevant.size == 0:
                if rep == 0:
                    skipped += 1
                continue
            dist = distances_to(X, q, exclude)
            border = ranking_order(dist)
            bdelta = dist[border]
            baseline = RankedList(
                order=border,
                delta=bdelta,
                sigma=np.zeros_like(bdelta),
                delta_tilde=bdelta.copy(),
            )
            neighbors = neighbors_from_distances(X, q, dist, config.m)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                clusters, _ = disambiguate(
                    neighbors,
                    DisambiguationParams(
                        eta=config.eta,
                        cap=config.cap,
                        r=config.r,
                        seed=case_seed(config.seed, rep, ci),
                    ),
                )
            if config.feedback_mode == "single":
                selection = simulate_single(clusters, case, labels)
            else:
                selection = simulate_multi(
                    clusters, case, labels, threshold=config.multi_threshold
                )
            for method in config.methods:
                if method == "baseline" or not selection:
                    ranking = baseline
                elif method == "aid":
                    ranking = rerank_from_distances(
                        X, q, dist, clusters, selection, rerank_params
                    )
                else:
                    ranking = hard_selection_rerank(
                        baseline, neighbors, clusters, selection
                    )
                ap_sums[method] += average_precision(ranking.order, relevant)
                curve_sums[method] += precision_curve(
                    ranking.order, relevant, config.kappa_max
                )
            used += 1
        if used == 0:
            raise ValidationError("every test case was skipped (empty relevant sets)")
        for method in config.methods:
            map_per_rep[method].append(ap_sums[method] / used)
            curve_per_rep[method].append(curve_sums[method] / used)
    results = {}
    for method in config.methods:
        reps_map = map_per_rep[method]
        reps_curve = np.stack(curve_per_rep[method])
        results[method] = MethodResult(
            map_mean=float(np.mean(reps_map)),
            map_std=float(np.std(reps_map)),
            map_per_rep=[float(v) for v in reps_map],
            p_at=reps_curve.mean(axis=0),
            p_at_per_rep=reps_curve,
        )
    return EvalReport(
        methods=results,
        repetitions=config.repetitions,
        n_cases=len(cases) - skipped,
        config=config.to_dict(),
        skipped_cases=skipped,
    )
