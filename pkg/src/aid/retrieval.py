"""Baseline retrieval: exact Euclidean distances and m-nearest-neighbor sets.

Everything here is a brute-force scan over the full database; at the scales
this engine targets (tens of thousands of items) an index buys nothing and
exactness keeps the downstream math and the test oracles simple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FeatureStore, ValidationError

# Sentinel distance for the excluded (self-query) item; sorts last and is
# filtered out by eligibility checks.
EXCLUDED = np.inf


@dataclass
class Query:
    """A query vector, optionally excluding one database index (self-query)."""

    vector: np.ndarray
    exclude_index: int | None = None

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValidationError("query vector contains NaN or Inf entries")
        self.vector = v


@dataclass
class NeighborSet:
    """The m nearest neighbors of a query, with unit directions.

    ``indices``/``distances`` are ordered by ascending distance (ties by
    ascending index). Neighbors coincident with the query (distance 0) have
    no defined direction; they are flagged False in ``usable`` and skipped in
    ``directions``, which holds one unit row per usable neighbor in order.
    """

    indices: np.ndarray
    distances: np.ndarray
    directions: np.ndarray
    usable: np.ndarray

    @property
    def m(self) -> int:
        return int(self.indices.size)

    @property
    def direction_indices(self) -> np.ndarray:
        """Database indices aligned with the rows of ``directions``."""
        return self.indices[self.usable]

    @property
    def direction_distances(self) -> np.ndarray:
        return self.distances[self.usable]


def _check_query(store: FeatureStore, query: Query) -> np.ndarray:
    q = query.vector
    if q.size != store.d:
        raise ValidationError(f"query has d={q.size}, store has d={store.d}")
    if query.exclude_index is not None and not 0 <= query.exclude_index < store.n:
        raise ValidationError(f"exclude_index {query.exclude_index} out of range")
    return q


def all_distances(store: FeatureStore, query: Query) -> np.ndarray:
    """Euclidean distance from the query to every database item.

    The excluded index (if any) carries the EXCLUDED sentinel. Accumulation
    is float64 regardless of the storage dtype.
    """
    q = _check_query(store, query)
    return distances_to(store.doubles(), q, query.exclude_index)


def distances_to(vectors: np.ndarray, q: np.ndarray, exclude_index: int | None = None) -> np.ndarray:
    """Distance scan against a raw float64 matrix (internal fast path)."""
    diff = vectors - q
    out = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if exclude_index is not None:
        out[exclude_index] = EXCLUDED
    return out


def ranking_order(distances: np.ndarray) -> np.ndarray:
    """Eligible indices sorted by ascending distance, ties by ascending index."""
    eligible = np.flatnonzero(np.isfinite(distances))
    return eligible[np.lexsort((eligible, distances[eligible]))]


def knn(store: FeatureStore, query: Query, m: int) -> NeighborSet:
    """The min(m, n_eligible) nearest neighbors with their unit directions."""
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    q = _check_query(store, query)
    dist = distances_to(store.doubles(), q, query.exclude_index)
    return neighbors_from_distances(store.doubles(), q, dist, m)


def neighbors_from_distances(
    vectors: np.ndarray, q: np.ndarray, distances: np.ndarray, m: int
) -> NeighborSet:
    """Build a NeighborSet from a precomputed distance scan."""
    order = ranking_order(distances)
    if order.size == 0:
        raise ValidationError("no eligible items to retrieve")
    take = order[: min(m, order.size)]
    d_take = distances[take]
    usable = d_take > 0.0
    kept = take[usable]
    directions = (vectors[kept] - q) / d_take[usable, None]
    return NeighborSet(
        indices=take, distances=d_take, directions=directions, usable=usable
    )
