"""Embedding-agnostic retrieval with neighborhood-direction disambiguation.

Given a query vector, the engine retrieves its nearest neighbors, clusters
the neighbors' directions from the query into sense clusters, lets a caller
select the relevant ones, and re-ranks the whole database by an adjusted
distance that rewards alignment with the selected directions.
"""

__version__ = "0.1.0"

from .data import (
    FeatureFormatError,
    FeatureStore,
    FeatureTruncationError,
    PcaModel,
    TopicLabels,
    ValidationError,
    load_features,
    load_labels,
    pca_fit,
    pca_project,
    save_features,
)
from .disambiguation import (
    ClusterSet,
    DisambiguationParams,
    EigengapDiagnostics,
    FeedbackSelection,
    affinity,
    choose_k,
    cluster,
    disambiguate,
    previews,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    TestCase,
    average_precision,
    hard_selection_rerank,
    make_test_cases,
    precision_at,
    preview_precision,
    run_experiment,
    simulate_multi,
    simulate_single,
)
from .rerank import RankedList, RerankParams, adjusted_distance, rerank, sigma
from .retrieval import NeighborSet, Query, all_distances, knn

__all__ = [
    "FeatureFormatError",
    "FeatureStore",
    "FeatureTruncationError",
    "PcaModel",
    "TopicLabels",
    "ValidationError",
    "load_features",
    "load_labels",
    "pca_fit",
    "pca_project",
    "save_features",
    "ClusterSet",
    "DisambiguationParams",
    "EigengapDiagnostics",
    "FeedbackSelection",
    "affinity",
    "choose_k",
    "cluster",
    "disambiguate",
    "previews",
    "EvalConfig",
    "EvalReport",
    "TestCase",
    "average_precision",
    "hard_selection_rerank",
    "make_test_cases",
    "precision_at",
    "preview_precision",
    "run_experiment",
    "simulate_multi",
    "simulate_single",
    "RankedList",
    "RerankParams",
    "adjusted_distance",
    "rerank",
    "sigma",
    "NeighborSet",
    "Query",
    "all_distances",
    "knn",
]
