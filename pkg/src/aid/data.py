"""Feature and label ingestion, AIDF persistence, and PCA preprocessing.

The on-disk feature format (AIDF) is a small binary container:

    magic    4 bytes   b"AIDF"
    version  u32 LE    currently 1
    n        u64 LE    item count
    d        u32 LE    feature dimensionality
    dtype    u8        0 = float32
    reserved 3 bytes   must be zero
    payload  n*d float32 LE values, row-major

Features are stored as float32; downstream numerics upcast to float64
(see :meth:`FeatureStore.doubles`).

Labels are a UTF-8 JSON object ``{"topics": [...], "assignments": [[...], ...]}``
with one assignment list per AIDF row. Optional ids are a newline-delimited
UTF-8 file with exactly n lines.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

AIDF_MAGIC = b"AIDF"
AIDF_VERSION = 1
_HEADER = struct.Struct("<4sIQIB3s")


class FeatureFormatError(ValueError):
    """Malformed AIDF container (magic, version, dtype, or reserved bytes)."""


class FeatureTruncationError(FeatureFormatError):
    """Payload length disagrees with the n*d promise in the header."""


class ValidationError(ValueError):
    """Structurally well-formed input carrying invalid values."""


@dataclass
class FeatureStore:
    """Immutable n x d matrix of database feature vectors.

    ``vectors`` is kept as read-only float32 (the storage dtype); call
    :meth:`doubles` for the cached float64 view used by all numerics.
    """

    vectors: np.ndarray
    ids: tuple[str, ...] | None = None
    _doubles: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if v.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(f"need n >= 1 and d >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("feature matrix contains NaN or Inf entries")
        v.flags.writeable = False
        self.vectors = v
        if self.ids is not None:
            self.ids = tuple(str(s) for s in self.ids)
            if len(self.ids) != v.shape[0]:
                raise ValidationError(
                    f"got {len(self.ids)} ids for {v.shape[0]} items"
                )
            if len(set(self.ids)) != len(self.ids):
                raise ValidationError("ids are not unique")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def doubles(self) -> np.ndarray:
        """Read-only float64 copy of the feature matrix, cached after first use."""
        if self._doubles is None:
            x = self.vectors.astype(np.float64)
            x.flags.writeable = False
            self._doubles = x
        return self._doubles


@dataclass
class TopicLabels:
    """Multi-label topic assignments, indexed parallel to the feature rows."""

    topics: list[str]
    assignments: list[list[int]]
    _masks: dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_topics(self) -> int:
        return len(self.topics)

    @property
    def n_items(self) -> int:
        return len(self.assignments)

    def has_topic(self, item: int, topic: int) -> bool:
        return topic in self.assignments[item]

    def topic_mask(self, topic: int) -> np.ndarray:
        """Boolean membership mask over items for one topic (cached)."""
        if not 0 <= topic < self.n_topics:
            raise ValidationError(f"topic index {topic} out of range")
        mask = self._masks.get(topic)
        if mask is None:
            mask = np.zeros(self.n_items, dtype=bool)
            for i, assigned in enumerate(self.assignments):
                if topic in assigned:
                    mask[i] = True
            mask.flags.writeable = False
            self._masks[topic] = mask
        return mask


@dataclass
class PcaModel:
    """Linear projection onto the leading principal directions.

    ``components`` rows are orthonormal and ordered by descending explained
    variance; ``mean`` is subtracted before projecting.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def d(self) -> int:
        return self.components.shape[1]

    @property
    def d_out(self) -> int:
        return self.components.shape[0]


def load_features(path: str | Path, ids_path: str | Path | None = None) -> FeatureStore:
    """Load an AIDF feature file (and optionally an ids file) into a FeatureStore."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FeatureFormatError(f"{path}: file shorter than AIDF header")
    magic, version, n, d, dtype, reserved = _HEADER.unpack_from(raw)
    if magic != AIDF_MAGIC:
        raise FeatureFormatError(f"{path}: bad magic {magic!r}")
    if version != AIDF_VERSION:
        raise FeatureFormatError(f"{path}: unsupported version {version}")
    if dtype != 0:
        raise FeatureFormatError(f"{path}: unsupported dtype code {dtype}")
    if reserved != b"\x00\x00\x00":
        raise FeatureFormatError(f"{path}: reserved bytes not zero")
    if n < 1 or d < 1:
        raise ValidationError(f"{path}: header declares n={n}, d={d}")
    expected = n * d * 4
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise FeatureTruncationError(
            f"{path}: header promises {expected} payload bytes, found {len(payload)}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    ids = load_ids(ids_path, n) if ids_path is not None else None
    return FeatureStore(vectors, ids=ids)


def save_features(store: FeatureStore, path: str | Path) -> None:
    """Write a FeatureStore to an AIDF file (float32 little-endian payload)."""
    path = Path(path)
    header = _HEADER.pack(AIDF_MAGIC, AIDF_VERSION, store.n, store.d, 0, b"\x00\x00\x00")
    with path.open("wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(store.vectors, dtype="<f4").tobytes())


def load_ids(path: str | Path, n: int) -> tuple[str, ...]:
    """Load a newline-delimited ids file; must contain exactly n lines."""
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    lines = text.split("\n") if text else []
    if len(lines) != n:
        raise ValidationError(f"{path}: expected {n} id lines, found {len(lines)}")
    return tuple(lines)


def load_labels(path: str | Path, store: FeatureStore) -> TopicLabels:
    """Load and validate a JSON labels file against a feature store."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        obj = json.load(f)
    if not isinstance(obj, dict) or "topics" not in obj or "assignments" not in obj:
        raise ValidationError(f"{path}: labels file needs 'topics' and 'assignments'")
    topics = [str(t) for t in obj["topics"]]
    assignments = obj["assignments"]
    if len(assignments) != store.n:
        raise ValidationError(
            f"{path}: {len(assignments)} assignment lists for {store.n} items"
        )
    cleaned: list[list[int]] = []
    for i, assigned in enumerate(assignments):
        row = [int(t) for t in assigned]
        for t in row:
            if not 0 <= t < len(topics):
                raise ValidationError(
                    f"{path}: item {i} references topic {t}, only {len(topics)} defined"
                )
        cleaned.append(row)
    return TopicLabels(topics=topics, assignments=cleaned)


def save_labels(labels: TopicLabels, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        json.dump({"topics": labels.topics, "assignments": labels.assignments}, f)


def pca_fit(store: FeatureStore, d_out: int) -> PcaModel:
    """Fit the top d_out principal directions of the mean-centered data.

    Zero-variance directions are completed with an arbitrary orthonormal
    basis and flagged with a warning.
    """
    X = store.doubles()
    n, d = X.shape
    if not 1 <= d_out <= min(n, d):
        raise ValidationError(f"d_out={d_out} must be in [1, min(n={n}, d={d})]")
    mean = X.mean(axis=0)
    centered = X - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:d_out].copy()
    # sign convention: largest-magnitude coordinate of each component positive
    for row in components:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    variance = (s[:d_out] ** 2) / max(n - 1, 1)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    if np.any(s[:d_out] <= scale * 1e-12):
        warnings.warn(
            "zero-variance directions present; surplus components come from an "
            "arbitrary orthonormal completion",
            stacklevel=2,
        )
    return PcaModel(mean=mean, components=components, explained_variance=variance)


def pca_project(model: PcaModel, store: FeatureStore) -> FeatureStore:
    """Project a FeatureStore through a fitted PCA model, preserving ids."""
    if store.d != model.d:
        raise ValidationError(
            f"store has d={store.d} but model was fitted on d={model.d}"
        )
    projected = (store.doubles() - model.mean) @ model.components.T
    return FeatureStore(projected.astype(np.float32), ids=store.ids)


def save_pca(model: PcaModel, path: str | Path) -> None:
    np.savez(
        path,
        mean=model.mean,
        components=model.components,
        explained_variance=model.explained_variance,
    )


def load_pca(path: str | Path) -> PcaModel:
    with np.load(path) as z:
        return PcaModel(
            mean=z["mean"],
            components=z["components"],
            explained_variance=z["explained_variance"],
        )
