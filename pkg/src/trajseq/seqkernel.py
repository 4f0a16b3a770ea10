"""Weighted common-subsequence kernel and derived distances.

Two feature sequences are compared through the inner product of their
(implicit) subsequence-count vectors.  Three refinements adapt the plain
count kernel to salience-annotated sequences:

* soft matching  — a positive-definite similarity matrix lets distinct
  feature classes partially match,
* gap weighting  — every consecutive pair in a matched chain is scaled by
  ``1 - |dt_x - dt_y|`` so chains with mismatched temporal spacing count
  less,
* salience weighting — every matched element pair contributes the product
  of the two saliences.

The squared distance between sequences is
``k(X,X) + k(Y,Y) - 2 k(X,Y)``; plan distances combine the per-dimension
values as the root of the sum of squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .features import FeatureClass, FeatureSequence

# Above this many (i, j) element pairs the transition tensor of the
# gap-weighted recursion is no longer materialised (memory grows with its
# square); a slower low-memory loop takes over.
_DENSE_PAIR_LIMIT = 2500

DEFAULT_LABELS = tuple(c.value for c in FeatureClass)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric positive-definite similarity over an alphabet of labels."""

    labels: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise ConfigurationError("similarity labels must be unique")
        if entries.shape != (n, n):
            raise ConfigurationError(f"similarity matrix must be {n}x{n}, got {entries.shape}")
        if np.any(entries < 0.0) or np.any(entries > 1.0):
            raise ConfigurationError("similarity entries must lie in [0, 1]")
        if not np.array_equal(entries, entries.T):
            raise ConfigurationError("similarity matrix must be symmetric")
        if np.any(np.diag(entries) != 1.0):
            raise ConfigurationError("similarity diagonal must be exactly 1")
        try:
            np.linalg.cholesky(entries)
        except np.linalg.LinAlgError as exc:
            raise ConfigurationError("similarity matrix is not positive definite") from exc
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(self.labels)})

    def index(self, label) -> int:
        key = label.value if isinstance(label, FeatureClass) else str(label)
        try:
            return self._index[key]
        except KeyError:
            raise ConfigurationError(
                f"label {key!r} not covered by similarity alphabet {self.labels}"
            ) from None

    @classmethod
    def identity(cls, labels: Sequence[str]) -> "SimilarityMatrix":
        return cls(tuple(labels), np.eye(len(labels)))

    @classmethod
    def for_feature_classes(cls, extremum_bound_similarity: float = 0.5) -> "SimilarityMatrix":
        """Default alphabet: max/ub and min/lb partially match, rest distinct."""
        sigma = float(extremum_bound_similarity)
        if not 0.0 <= sigma < 1.0:
            raise ConfigurationError(f"extremum/bound similarity must lie in [0, 1), got {sigma}")
        m = np.eye(len(DEFAULT_LABELS))
        pairs = [
            (FeatureClass.MAX.value, FeatureClass.UPPER_BOUND.value),
            (FeatureClass.MIN.value, FeatureClass.LOWER_BOUND.value),
        ]
        for a, b in pairs:
            i, j = DEFAULT_LABELS.index(a), DEFAULT_LABELS.index(b)
            m[i, j] = m[j, i] = sigma
        return cls(DEFAULT_LABELS, m)


@dataclass(frozen=True)
class KernelConfig:
    """Kernel options; defaults enable all three refinements."""

    similarity: SimilarityMatrix = field(default_factory=SimilarityMatrix.for_feature_classes)
    use_gap_weighting: bool = True
    use_salience_weighting: bool = True
    max_subseq_len: Optional[int] = None

    def __post_init__(self) -> None:
        if self.max_subseq_len is not None and self.max_subseq_len < 1:
            raise ConfigurationError("max_subseq_len must be >= 1")


def gap_weight(t_x_prev: float, t_x: float, t_y_prev: float, t_y: float) -> float:
    """Penalty for mismatched time spans between consecutive matched features."""
    return 1.0 - abs((t_x - t_x_prev) - (t_y - t_y_prev))


def _prepare(seq: FeatureSequence, cfg: KernelConfig):
    idx = np.array([cfg.similarity.index(e.feature_class) for e in seq.elements], dtype=int)
    times = seq.times()
    sal = seq.saliences() if cfg.use_salience_weighting else np.ones(len(seq))
    return idx, times, sal


def _canonical_order(x: FeatureSequence, y: FeatureSequence):
    """Fix the summation order so k(x, y) == k(y, x) bit-exactly."""
    key = lambda s: (tuple(s.labels()), tuple(s.times()), tuple(s.saliences()))
    return (y, x) if key(y) < key(x) else (x, y)


def kernel(x: FeatureSequence, y: FeatureSequence, cfg: Optional[KernelConfig] = None) -> float:
    """Subsequence kernel ``k(x, y)`` evaluated by dynamic programming.

    Sums, over every pair of equal-length index chains in ``x`` and ``y``,
    the product of per-position similarity and salience weights and of the
    gap weights between consecutive chain entries.  Cost is
    ``O(P * |x|^2 * |y|^2)`` with gap weighting and
    ``O(P * |x| * |y|)`` without; feature sequences are short enough in
    practice that the quartic path dominates only for pathological inputs.
    """
    cfg = cfg or KernelConfig()
    x, y = _canonical_order(x, y)
    nx, ny = len(x), len(y)
    if nx == 0 or ny == 0:
        return 0.0
    ix, tx, sx = _prepare(x, cfg)
    iy, ty, sy = _prepare(y, cfg)

    sw = cfg.similarity.entries[np.ix_(ix, iy)]
    if cfg.use_salience_weighting:
        sw = sw * np.outer(sx, sy)

    max_len = min(nx, ny)
    if cfg.max_subseq_len is not None:
        max_len = min(max_len, cfg.max_subseq_len)

    k_p = sw.copy()
    total = float(k_p.sum())
    if max_len == 1:
        return total

    if not cfg.use_gap_weighting:
        for _ in range(2, max_len + 1):
            acc = k_p.cumsum(axis=0).cumsum(axis=1)
            prefix = np.zeros_like(k_p)
            prefix[1:, 1:] = acc[:-1, :-1]
            k_p = sw * prefix
            if not k_p.any():
                break
            total += float(k_p.sum())
        return total

    # gap weight 1 - |(tx_i - tx_i') - (ty_j - ty_j')| depends only on
    # u = tx_i - ty_j, which keeps the transition a fixed linear map
    u = tx[:, None] - ty[None, :]
    if nx * ny <= _DENSE_PAIR_LIMIT:
        g = 1.0 - np.abs(u[None, None, :, :] - u[:, :, None, None])
        before_x = np.triu(np.ones((nx, nx)), k=1)  # [i', i] -> 1 iff i' < i
        before_y = np.triu(np.ones((ny, ny)), k=1)
        g *= before_x[:, None, :, None] * before_y[None, :, None, :]
        g_flat = g.reshape(nx * ny, nx * ny)
        for _ in range(2, max_len + 1):
            k_p = sw * (k_p.reshape(-1) @ g_flat).reshape(nx, ny)
            if not k_p.any():
                break
            total += float(k_p.sum())
        return total

    for _ in range(2, max_len + 1):
        nxt = np.zeros_like(k_p)
        for i in range(1, nx):
            for j in range(1, ny):
                g = 1.0 - np.abs(u[i, j] - u[:i, :j])
                nxt[i, j] = sw[i, j] * float((g * k_p[:i, :j]).sum())
        k_p = nxt
        if not k_p.any():
            break
        total += float(k_p.sum())
    return total


def kernel_bruteforce(
    x: FeatureSequence, y: FeatureSequence, cfg: Optional[KernelConfig] = None
) -> float:
    """Exhaustive chain enumeration; test oracle for :func:`kernel`.

    Refuses sequences longer than 8 elements (enumeration blows up).
    """
    cfg = cfg or KernelConfig()
    nx, ny = len(x), len(y)
    if nx > 8 or ny > 8:
        raise ConfigurationError("kernel_bruteforce is limited to sequences of length <= 8")
    if nx == 0 or ny == 0:
        return 0.0
    ix, tx, sx = _prepare(x, cfg)
    iy, ty, sy = _prepare(y, cfg)
    sim = cfg.similarity.entries

    max_len = min(nx, ny)
    if cfg.max_subseq_len is not None:
        max_len = min(max_len, cfg.max_subseq_len)

    total = 0.0
    for p in range(1, max_len + 1):
        for ci in combinations(range(nx), p):
            for cj in combinations(range(ny), p):
                term = 1.0
                for q in range(p):
                    term *= sim[ix[ci[q]], iy[cj[q]]]
                    if cfg.use_salience_weighting:
                        term *= sx[ci[q]] * sy[cj[q]]
                if cfg.use_gap_weighting:
                    for q in range(1, p):
                        term *= gap_weight(tx[ci[q - 1]], tx[ci[q]], ty[cj[q - 1]], ty[cj[q]])
                total += term
    return total


def dimension_distance(
    x: FeatureSequence, y: FeatureSequence, cfg: Optional[KernelConfig] = None
) -> float:
    """Kernel-induced distance between two feature sequences.

    The squared norm is clamped at zero: floating point and the joint gap
    weighting can drive it epsilon-negative.
    """
    cfg = cfg or KernelConfig()
    sq = kernel(x, x, cfg) + kernel(y, y, cfg) - 2.0 * kernel(x, y, cfg)
    return math.sqrt(max(sq, 0.0))


def plan_distance(
    a: Sequence[FeatureSequence], b: Sequence[FeatureSequence], cfg: Optional[KernelConfig] = None
) -> float:
    """Combined distance over all dimensions: root of the sum of squares."""
    cfg = cfg or KernelConfig()
    ids_a = [s.dimension_id for s in a]
    ids_b = [s.dimension_id for s in b]
    if ids_a != ids_b:
        raise ConfigurationError(f"dimension ids differ: {ids_a} vs {ids_b}")
    return math.sqrt(sum(dimension_distance(sx, sy, cfg) ** 2 for sx, sy in zip(a, b)))
