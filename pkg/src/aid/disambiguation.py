"""Neighborhood disambiguation: split a query's neighbors into sense clusters.

Pipeline: build a Gaussian affinity over the neighbors' unit directions,
pick the cluster count k from the largest gap in the ascending generalized
Laplacian spectrum, run k-means over the directions, and select per-cluster
preview items (the members closest to the query).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .data import ValidationError
from .retrieval import NeighborSet

DEFAULT_CAP = 10
DEFAULT_PREVIEWS = 10
KMEANS_MAX_ITER = 300


@dataclass
class EigengapDiagnostics:
    """Spectral byproducts of the cluster-count decision."""

    affinity: np.ndarray
    eta: float
    eigenvalues: np.ndarray
    chosen_k: int
    cap: int

    def to_dict(self) -> dict:
        """JSON-serializable summary (the affinity matrix itself is omitted)."""
        return {
            "eta": self.eta,
            "m": int(self.affinity.shape[0]),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "chosen_k": self.chosen_k,
            "cap": self.cap,
        }


@dataclass
class ClusterSet:
    """A partition of the neighborhood directions into k clusters.

    ``centroids`` are plain means of member directions and are generally not
    unit vectors. ``members``/``previews``/``preview_distances`` are filled
    by :func:`previews` and hold database indices in ascending-distance order.
    """

    assignments: np.ndarray
    centroids: np.ndarray
    k: int
    r: int | None = None
    members: list[np.ndarray] | None = None
    previews: list[np.ndarray] | None = None
    preview_distances: list[np.ndarray] | None = None


@dataclass(frozen=True)
class FeedbackSelection:
    """The set of cluster ids a user (or simulator) marked relevant."""

    selected: frozenset[int]

    def __init__(self, selected=()):
        object.__setattr__(self, "selected", frozenset(int(c) for c in selected))

    @property
    def ell(self) -> int:
        return len(self.selected)

    def __bool__(self) -> bool:
        return bool(self.selected)


@dataclass
class DisambiguationParams:
    """Knobs for the disambiguation pipeline; eta=None resolves to sqrt(d)."""

    eta: float | None = None
    cap: int = DEFAULT_CAP
    r: int = DEFAULT_PREVIEWS
    seed: int = 0


def affinity(directions: np.ndarray, eta: float) -> np.ndarray:
    """Gaussian affinity A_ij = exp(-eta * ||x_i - x_j||^2) over unit rows."""
    X = np.asarray(directions, dtype=np.float64)
    m = X.shape[0]
    if m < 2:
        raise ValidationError(f"affinity needs at least 2 directions, got {m}")
    if eta <= 0:
        raise ValidationError(f"eta must be positive, got {eta}")
    # for unit rows, ||a-b||^2 = 2 - 2 a.b
    gram = X @ X.T
    sq = np.clip(2.0 - 2.0 * gram, 0.0, None)
    A = np.exp(-eta * sq)
    A = (A + A.T) / 2.0
    np.fill_diagonal(A, 1.0)
    return A


def choose_k(
    affinity_matrix: np.ndarray, cap: int = DEFAULT_CAP, eta: float = float("nan")
) -> tuple[int, EigengapDiagnostics]:
    """Pick the cluster count from the largest eigengap of L v = lambda D v.

    L = D - A with D = diag(row sums). The generalized problem is reduced to
    the symmetric D^{-1/2} L D^{-1/2} (valid because every row sum is >= 1),
    whose spectrum lies in [0, 2] with a leading 0. k is the 1-based index of
    the largest gap between consecutive ascending eigenvalues (first index on
    ties), clamped to cap.
    """
    A = np.asarray(affinity_matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"affinity must be square, got shape {A.shape}")
    if A.shape[0] < 2:
        raise ValidationError("affinity must be at least 2x2")
    if not np.allclose(A, A.T, atol=1e-10):
        raise ValidationError("affinity matrix is not symmetric")
    if cap < 1:
        raise ValidationError(f"cap must be >= 1, got {cap}")
    s = A.sum(axis=1)
    if np.any(s <= 0):
        raise ValidationError("affinity has a non-positive row sum")
    L = np.diag(s) - A
    inv_sqrt = 1.0 / np.sqrt(s)
    M = L * inv_sqrt[:, None] * inv_sqrt[None, :]
    M = (M + M.T) / 2.0
    eigenvalues = np.linalg.eigvalsh(M)
    gaps = np.diff(eigenvalues)
    k_star = int(np.argmax(gaps)) + 1
    k = min(k_star, cap)
    diag = EigengapDiagnostics(
        affinity=A, eta=float(eta), eigenvalues=eigenvalues, chosen_k=k, cap=cap
    )
    return k, diag


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[int(rng.integers(m))]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(m))
        else:
            idx = int(rng.choice(m, p=d2 / total))
        centroids[j] = X[idx]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(assign: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    # move the point farthest from its own centroid into each empty cluster;
    # stealing can empty another cluster, so loop until the partition is full
    for _ in range(k):
        counts = np.bincount(assign, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            break
        own = d2[np.arange(assign.size), assign]
        # never steal from a singleton cluster
        own = np.where(counts[assign] > 1, own, -np.inf)
        far = int(np.argmax(own))
        assign[far] = empties[0]
    return assign


def cluster(directions: np.ndarray, k: int, seed: int) -> ClusterSet:
    """Lloyd's k-means over direction vectors, k-means++ init, fixed seed.

    Converges when assignments stop changing or after 300 iterations; empty
    clusters are repaired by reseeding with the point farthest from its
    centroid. Deterministic for a given seed.
    """
    X = np.asarray(directions, dtype=np.float64)
    m = X.shape[0]
    if not 1 <= k <= m:
        raise ValidationError(f"need 1 <= k <= m, got k={k}, m={m}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(X, k, rng)
    assign: np.ndarray | None = None
    for _ in range(KMEANS_MAX_ITER):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new = _repair_empty(d2.argmin(axis=1), d2, k)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        centroids = np.stack([X[assign == c].mean(axis=0) for c in range(k)])
    return ClusterSet(assignments=assign, centroids=centroids, k=k)


def previews(clusters: ClusterSet, neighbors: NeighborSet, r: int) -> ClusterSet:
    """Attach per-cluster membership and preview lists (nearest r members).

    Directions are stored in ascending-distance order, so per-cluster member
    lists inherit the right ordering from a stable filter.
    """
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    db_indices = neighbors.direction_indices
    db_distances = neighbors.direction_distances
    members: list[np.ndarray] = []
    prevs: list[np.ndarray] = []
    prev_dists: list[np.ndarray] = []
    for c in range(clusters.k):
        rows = clusters.assignments == c
        members.append(db_indices[rows])
        prevs.append(db_indices[rows][:r])
        prev_dists.append(db_distances[rows][:r])
    return replace(
        clusters, r=r, members=members, previews=prevs, preview_distances=prev_dists
    )


def disambiguate(
    neighbors: NeighborSet, params: DisambiguationParams | None = None
) -> tuple[ClusterSet, EigengapDiagnostics]:
    """Full pipeline: affinity -> eigengap k -> k-means -> previews."""
    params = params or DisambiguationParams()
    X = neighbors.directions
    m_usable = X.shape[0]
    if m_usable < 2:
        warnings.warn(
            f"only {m_usable} usable directions; returning a single trivial cluster",
            stacklevel=2,
        )
        d = X.shape[1] if X.ndim == 2 else neighbors.indices.size
        centroid = X.mean(axis=0) if m_usable else np.zeros(d)
        trivial = ClusterSet(
            assignments=np.zeros(m_usable, dtype=np.int64),
            centroids=centroid[None, :],
            k=1,
        )
        diag = EigengapDiagnostics(
            affinity=np.ones((m_usable, m_usable)),
            eta=float("nan"),
            eigenvalues=np.zeros(m_usable),
            chosen_k=1,
            cap=params.cap,
        )
        return previews(trivial, neighbors, params.r), diag
    eta = params.eta if params.eta is not None else math.sqrt(X.shape[1])
    A = affinity(X, eta)
    k, diag = choose_k(A, cap=params.cap, eta=eta)
    clusters = cluster(X, k, seed=params.seed)
    return previews(clusters, neighbors, params.r), diag
