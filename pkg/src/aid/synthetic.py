"""Deterministic synthetic datasets for benchmarks, demos, and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FeatureStore, TopicLabels
from .evaluation import TestCase


@dataclass
class MixtureBenchmark:
    store: FeatureStore
    labels: TopicLabels
    cases: list[TestCase]
    topic_means: np.ndarray


def topic_mixture(
    n_topics: int = 5,
    per_topic: int = 400,
    dim: int = 32,
    spread: float = 0.15,
    seed: int = 0,
) -> tuple[FeatureStore, TopicLabels, np.ndarray]:
    """Isotropic Gaussian topic clouds around unit-norm means.

    Means are the first ``n_topics`` canonical basis vectors (pairwise 90
    degrees apart), so every pair of topics is equally separated.
    """
    if n_topics > dim:
        raise ValueError(f"need dim >= n_topics, got {dim} < {n_topics}")
    rng = np.random.default_rng(seed)
    means = np.eye(dim)[:n_topics]
    vectors = np.concatenate(
        [means[t] + spread * rng.standard_normal((per_topic, dim)) for t in range(n_topics)]
    )
    assignments = [[t] for t in range(n_topics) for _ in range(per_topic)]
    labels = TopicLabels(
        topics=[f"topic-{t}" for t in range(n_topics)], assignments=assignments
    )
    return FeatureStore(vectors.astype(np.float32)), labels, means


def midpoint_queries(
    topic_means: np.ndarray,
    n_queries: int = 100,
    jitter: float = 0.05,
    seed: int = 0,
) -> list[tuple[np.ndarray, tuple[int, int]]]:
    """Ambiguous queries near the midpoints of topic-mean pairs.

    Pairs are cycled so every pair gets equal coverage; each query carries
    the two topics whose midpoint it perturbs.
    """
    rng = np.random.default_rng(seed)
    n_topics = topic_means.shape[0]
    pairs = [(a, b) for a in range(n_topics) for b in range(a + 1, n_topics)]
    queries = []
    for i in range(n_queries):
        a, b = pairs[i % len(pairs)]
        q = (topic_means[a] + topic_means[b]) / 2.0
        q = q + jitter * rng.standard_normal(topic_means.shape[1])
        queries.append((q, (a, b)))
    return queries


def mixture_benchmark(seed: int = 0) -> MixtureBenchmark:
    """The fixed end-to-end benchmark: 5 topics x 400 items in 32-d, 100
    midpoint queries, each issued once per adjacent topic (200 cases)."""
    store, labels, means = topic_mixture(
        n_topics=5, per_topic=400, dim=32, spread=0.15, seed=seed
    )
    cases = []
    for q, (a, b) in midpoint_queries(means, n_queries=100, seed=seed + 1):
        cases.append(TestCase(target_topic=a, query_vector=q))
        cases.append(TestCase(target_topic=b, query_vector=q))
    return MixtureBenchmark(store=store, labels=labels, cases=cases, topic_means=means)


def direction_bundles(
    n_bundles: int = 3,
    per_bundle: int = 20,
    angular_noise: float = 0.05,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions in the plane grouped into tight, evenly spaced bundles.

    Returns (directions, bundle_labels); bundle centers are 360/n_bundles
    degrees apart and each member's angle is jittered by Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    angles = []
    labels = []
    for b in range(n_bundles):
        center = 2.0 * np.pi * b / n_bundles
        angles.append(center + angular_noise * rng.standard_normal(per_bundle))
        labels.append(np.full(per_bundle, b))
    theta = np.concatenate(angles)
    directions = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return directions, np.concatenate(labels)


def bundle_neighborhood(
    n_bundles: int = 3,
    per_bundle: int = 20,
    angular_noise: float = 0.05,
    seed: int = 0,
):
    """A NeighborSet whose directions form known sense bundles (plus truth).

    Distances are random positive values; indices are 0..m-1.
    """
    from .retrieval import NeighborSet

    directions, truth = direction_bundles(n_bundles, per_bundle, angular_noise, seed)
    rng = np.random.default_rng(seed + 7)
    m = directions.shape[0]
    distances = np.sort(rng.uniform(0.5, 2.0, size=m))
    neighbors = NeighborSet(
        indices=np.arange(m, dtype=np.int64),
        distances=distances,
        directions=directions,
        usable=np.ones(m, dtype=bool),
    )
    return neighbors, truth
