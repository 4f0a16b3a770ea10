"""Scikit-learn style wrappers around the functional core.

``FeatureSequenceExtractor`` is a stateless transformer turning motion
plans into per-dimension feature sequences; ``MotionPlanClusterer`` runs
the full pipeline (extract -> pairwise distances -> single linkage -> cut)
with either the feature-sequence metric or the DTW baseline.  Both follow
the estimator contract (``get_params`` / ``set_params`` / ``fit``), so they
compose with pipelines, grid search and friends.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin

from .cluster import cut, pairwise_matrix, single_linkage
from .dtw import dtw_distance, sample
from .errors import ConfigurationError
from .features import ALL_CLASSES, ExtractionConfig, FeatureClass, extract
from .seqkernel import KernelConfig, SimilarityMatrix, plan_distance
from .model import MotionPlan

METRICS = ("feature", "dtw")


def _check_plans(X) -> list[MotionPlan]:
    plans = list(X)
    if not plans:
        raise ConfigurationError("expected a non-empty sequence of MotionPlan objects")
    for i, plan in enumerate(plans):
        if not isinstance(plan, MotionPlan):
            raise ConfigurationError(f"X[{i}] is {type(plan).__name__}, expected MotionPlan")
    names = [p.name for p in plans]
    if len(set(names)) != len(names):
        raise ConfigurationError("plan names must be unique")
    return plans


def _extraction_config(classes, prominence_threshold, epsilon_rel) -> ExtractionConfig:
    enabled = ALL_CLASSES if classes is None else frozenset(FeatureClass(c) for c in classes)
    return ExtractionConfig(
        enabled_classes=enabled,
        prominence_threshold=prominence_threshold,
        constraint_epsilon_rel=epsilon_rel,
    )


class FeatureSequenceExtractor(TransformerMixin, BaseEstimator):
    """Transform motion plans into per-dimension feature sequences.

    Parameters
    ----------
    prominence_threshold : float, default=0.02
        Extrema/constraint features below this salience are discarded.
    epsilon_rel : float, default=0.01
        Active-constraint tolerance as a fraction of the bound span.
    classes : sequence of str or FeatureClass, optional
        Feature classes to extract; all five when omitted.
    """

    def __init__(self, prominence_threshold=0.02, epsilon_rel=0.01, classes=None):
        self.prominence_threshold = prominence_threshold
        self.epsilon_rel = epsilon_rel
        self.classes = classes

    def fit(self, X, y=None):
        _check_plans(X)
        self._config()
        return self

    def transform(self, X):
        config = self._config()
        return [extract(plan, config) for plan in _check_plans(X)]

    def _config(self) -> ExtractionConfig:
        return _extraction_config(self.classes, self.prominence_threshold, self.epsilon_rel)


class MotionPlanClusterer(ClusterMixin, BaseEstimator):
    """Single-linkage clustering of motion plans.

    Exactly one of ``n_clusters`` / ``distance_threshold`` selects the cut.
    ``metric="feature"`` runs the feature-sequence kernel distance,
    ``metric="dtw"`` the sampled DTW baseline.

    Attributes (after ``fit``)
    --------------------------
    labels_ : ndarray of shape (n_plans,)
    distance_matrix_ : DistanceMatrix
    dendrogram_ : Dendrogram
    feature_sequences_ : list of per-plan feature sequences (feature metric only)
    """

    def __init__(
        self,
        n_clusters=2,
        distance_threshold=None,
        metric="feature",
        prominence_threshold=0.02,
        epsilon_rel=0.01,
        classes=None,
        soft_similarity=0.5,
        gap_weighting=True,
        salience_weighting=True,
        max_subseq_len=None,
        samples=150,
        n_jobs=1,
    ):
        self.n_clusters = n_clusters
        self.distance_threshold = distance_threshold
        self.metric = metric
        self.prominence_threshold = prominence_threshold
        self.epsilon_rel = epsilon_rel
        self.classes = classes
        self.soft_similarity = soft_similarity
        self.gap_weighting = gap_weighting
        self.salience_weighting = salience_weighting
        self.max_subseq_len = max_subseq_len
        self.samples = samples
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        plans = _check_plans(X)
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.distance_threshold is not None and self.n_clusters is not None:
            raise ConfigurationError("set n_clusters=None when using distance_threshold")
        if self.distance_threshold is None and self.n_clusters is None:
            raise ConfigurationError("one of n_clusters / distance_threshold is required")

        names = [p.name for p in plans]
        if self.metric == "feature":
            config = _extraction_config(self.classes, self.prominence_threshold, self.epsilon_rel)
            kcfg = KernelConfig(
                similarity=SimilarityMatrix.for_feature_classes(self.soft_similarity),
                use_gap_weighting=self.gap_weighting,
                use_salience_weighting=self.salience_weighting,
                max_subseq_len=self.max_subseq_len,
            )
            seqs = [extract(plan, config) for plan in plans]
            self.feature_sequences_ = seqs
            dmat = pairwise_matrix(
                seqs, lambda a, b: plan_distance(a, b, kcfg), ids=names, n_jobs=self.n_jobs
            )
        else:
            series = [sample(plan, self.samples) for plan in plans]
            dmat = pairwise_matrix(series, dtw_distance, ids=names, n_jobs=self.n_jobs)

        self.distance_matrix_ = dmat
        self.dendrogram_ = single_linkage(dmat)
        if self.n_clusters is not None:
            labels = cut(self.dendrogram_, num_clusters=self.n_clusters)
        else:
            labels = cut(self.dendrogram_, height=self.distance_threshold)
        self.labels_ = labels.as_array(names)
        self.n_clusters_ = labels.n_clusters
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
