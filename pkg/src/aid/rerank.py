"""Global re-ranking of the database against selected sense clusters.

Every database item x gets a directional agreement score sigma(x): the
largest cosine between any selected cluster centroid and the vector from the
query to x. The adjusted distance

    delta_tilde(x) = delta(x) - sign(sigma(x)) * |sigma(x)|**gamma * beta

pulls aligned items toward the query, pushes opposite-direction items away,
and leaves orthogonal items untouched. Negative adjusted distances are fine:
the value is only ever used for sorting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import FeatureStore, ValidationError
from .disambiguation import ClusterSet, FeedbackSelection
from .retrieval import Query, all_distances


@dataclass
class RerankParams:
    """gamma controls feedback influence; beta=None means the max-distance rule
    (beta = largest eligible distance, recomputed per query)."""

    gamma: float = 1.0
    beta: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if self.beta is not None and self.beta <= 0:
            raise ValidationError(f"explicit beta must be positive, got {self.beta}")

    @property
    def beta_mode(self) -> str:
        return "max-distance" if self.beta is None else "explicit"


@dataclass
class RankedList:
    """A permutation of the eligible database indices with per-item scores.

    ``delta``/``sigma``/``delta_tilde`` are aligned with ``order``.
    """

    order: np.ndarray
    delta: np.ndarray
    sigma: np.ndarray
    delta_tilde: np.ndarray
    beta: float | None = None

    def __len__(self) -> int:
        return int(self.order.size)


def sigma(item: np.ndarray, query: Query, centroids: np.ndarray) -> float:
    """Max cosine between q->item and any selected centroid direction.

    Defined as +1 when the item coincides with the query (the cosine is 0/0
    there and the item already ranks first either way).
    """
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    if centroids.shape[0] < 1:
        raise ValidationError("sigma needs at least one selected centroid")
    v = np.asarray(item, dtype=np.float64) - query.vector
    dist = float(np.linalg.norm(v))
    if dist == 0.0:
        return 1.0
    norms = np.linalg.norm(centroids, axis=1)
    good = norms > 0.0
    if not np.any(good):
        return 0.0
    cosines = (centroids[good] @ v) / (norms[good] * dist)
    return float(np.clip(cosines.max(), -1.0, 1.0))


def adjusted_distance(
    delta: float | np.ndarray,
    sigma_value: float | np.ndarray,
    params: RerankParams,
    beta: float,
) -> float | np.ndarray:
    """delta - sign(sigma) * |sigma|**gamma * beta, with sign(0) = 0."""
    s = np.asarray(sigma_value, dtype=np.float64)
    if np.any(np.abs(s) > 1.0 + 1e-12):
        raise ValidationError("sigma values must lie in [-1, 1]")
    # sign(0)=0 keeps delta unchanged even though 0**0 == 1
    adjustment = np.sign(s) * np.abs(s) ** params.gamma * beta
    out = np.asarray(delta, dtype=np.float64) - adjustment
    return out if out.ndim else float(out)


def _unit_centroids(clusters: ClusterSet, selection: FeedbackSelection) -> np.ndarray | None:
    """Unit rows for the selected centroids; None if all have zero norm."""
    ids = sorted(selection.selected)
    for c in ids:
        if not 0 <= c < clusters.k:
            raise ValidationError(f"cluster id {c} out of range (k={clusters.k})")
    cents = clusters.centroids[ids]
    norms = np.linalg.norm(cents, axis=1)
    good = norms > 0.0
    if not np.any(good):
        warnings.warn("all selected centroids have zero norm; sigma falls back to 0")
        return None
    if not np.all(good):
        warnings.warn("dropping zero-norm centroid(s) from the selection")
    return cents[good] / norms[good, None]


def rerank_from_distances(
    vectors: np.ndarray,
    q: np.ndarray,
    distances: np.ndarray,
    clusters: ClusterSet,
    selection: FeedbackSelection,
    params: RerankParams,
) -> RankedList:
    """Re-rank using a precomputed distance scan (fast path for the harness)."""
    eligible = np.flatnonzero(np.isfinite(distances))
    if eligible.size == 0:
        raise ValidationError("no eligible items to rank")
    delta = distances[eligible]
    if not selection:
        # no refinement: the baseline ascending-distance ordering
        perm = np.lexsort((eligible, delta))
        order = eligible[perm]
        d_sorted = delta[perm]
        return RankedList(
            order=order,
            delta=d_sorted,
            sigma=np.zeros_like(d_sorted),
            delta_tilde=d_sorted.copy(),
            beta=None,
        )
    unit_c = _unit_centroids(clusters, selection)
    if unit_c is None:
        sig = np.zeros_like(delta)
    else:
        diffs = vectors[eligible] - q
        best = (diffs @ unit_c.T).max(axis=1)
        sig = np.ones_like(delta)
        nz = delta > 0.0
        sig[nz] = best[nz] / delta[nz]
        np.clip(sig, -1.0, 1.0, out=sig)
    beta = params.beta if params.beta is not None else float(delta.max())
    if beta <= 0.0:
        beta = 1.0  # every eligible item coincides with q; adjustment is moot
    delta_tilde = adjusted_distance(delta, sig, params, beta)
    perm = np.lexsort((eligible, delta, delta_tilde))
    return RankedList(
        order=eligible[perm],
        delta=delta[perm],
        sigma=sig[perm],
        delta_tilde=delta_tilde[perm],
        beta=beta,
    )


def rerank(
    store: FeatureStore,
    query: Query,
    clusters: ClusterSet,
    selection: FeedbackSelection,
    params: RerankParams | None = None,
) -> RankedList:
    """Score and sort every eligible database item against the selection.

    An empty selection returns the baseline ascending-distance ranking
    unchanged (sigma 0, delta_tilde = delta).
    """
    params = params or RerankParams()
    dist = all_distances(store, query)
    return rerank_from_distances(
        store.doubles(), query.vector, dist, clusters, selection, params
    )
