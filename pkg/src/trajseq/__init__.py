"""trajseq: feature-sequence compression and clustering of motion plans.

Pipeline: reduce every trajectory dimension to a short sequence of salient
features, compare plans with a weighted common-subsequence kernel (with a
DTW baseline on raw samples), and cluster the resulting distance matrix by
single-linkage agglomeration.
"""

from .cluster import (
    ClusterLabels,
    Dendrogram,
    DistanceMatrix,
    confusion,
    cut,
    pairwise_matrix,
    single_linkage,
)
from .dtw import SampledSeries, dtw_distance, sample
from .errors import ConfigurationError, DataError, DomainError, FormatError, TrajseqError
from .estimators import FeatureSequenceExtractor, MotionPlanClusterer
from .features import (
    ExtractionConfig,
    FeatureClass,
    FeatureElement,
    FeatureSequence,
    extract,
    find_constrained_arcs,
    find_extrema,
    find_roots,
    prominence,
)
from .seqkernel import (
    KernelConfig,
    SimilarityMatrix,
    dimension_distance,
    gap_weight,
    kernel,
    kernel_bruteforce,
    plan_distance,
)
from .model import (
    DimensionBounds,
    MotionPlan,
    PiecewisePolynomial,
    from_samples,
    normalize_time,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterLabels",
    "ConfigurationError",
    "DataError",
    "Dendrogram",
    "DimensionBounds",
    "DistanceMatrix",
    "DomainError",
    "ExtractionConfig",
    "FeatureClass",
    "FeatureElement",
    "FeatureSequence",
    "FeatureSequenceExtractor",
    "FormatError",
    "KernelConfig",
    "MotionPlan",
    "MotionPlanClusterer",
    "PiecewisePolynomial",
    "SampledSeries",
    "SimilarityMatrix",
    "TrajseqError",
    "confusion",
    "cut",
    "dimension_distance",
    "dtw_distance",
    "extract",
    "find_constrained_arcs",
    "find_extrema",
    "find_roots",
    "from_samples",
    "gap_weight",
    "kernel",
    "kernel_bruteforce",
    "normalize_time",
    "pairwise_matrix",
    "plan_distance",
    "prominence",
    "sample",
    "single_linkage",
]
