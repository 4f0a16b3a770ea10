"""Distance-matrix assembly, single-linkage clustering, and evaluation.

Single linkage is implemented directly (rather than delegated) so tie
handling is pinned down: among pairs at the minimal distance the one with
the lexicographically smallest item-index representatives merges first,
which makes dendrograms reproducible across platforms.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigurationError, FormatError


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances with named items."""

    item_ids: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "item_ids", tuple(str(i) for i in self.item_ids))
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        n = len(self.item_ids)
        if len(set(self.item_ids)) != n:
            raise FormatError("item ids must be unique")
        if entries.shape != (n, n):
            raise FormatError(f"expected a {n}x{n} matrix, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise FormatError("distance matrix must be finite")
        if np.any(entries < 0):
            raise FormatError("distances must be non-negative")
        if np.any(np.diag(entries) != 0.0):
            raise FormatError("distance matrix diagonal must be exactly 0")
        if not np.array_equal(entries, entries.T):
            raise FormatError("distance matrix must be exactly symmetric")

    @property
    def size(self) -> int:
        return len(self.item_ids)


def pairwise_matrix(
    items: Sequence,
    metric: Callable,
    ids: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
) -> DistanceMatrix:
    """All pairwise distances under a pure, symmetric metric.

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric and independent of the execution schedule
    (``n_jobs > 1`` evaluates pairs on a thread pool).
    """
    n = len(items)
    if n < 2:
        raise ConfigurationError("need at least 2 items for a distance matrix")
    if ids is None:
        ids = [getattr(item, "name", str(i)) for i, item in enumerate(items)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def compute(pair):
        i, j = pair
        try:
            return metric(items[i], items[j])
        except Exception as exc:
            raise type(exc)(f"metric failed on pair ({ids[i]}, {ids[j]}): {exc}") from exc

    if n_jobs == 1:
        values = [compute(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as pool:
            values = list(pool.map(compute, pairs))

    d = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        d[i, j] = d[j, i] = v
    return DistanceMatrix(tuple(ids), d)


@dataclass(frozen=True)
class Dendrogram:
    """Ordered merge list of an agglomerative clustering.

    Leaves carry cluster ids ``0 .. n-1`` in item order; merge ``k``
    creates cluster ``n + k``.  Heights are non-decreasing (single-linkage
    monotonicity) and every cluster id appears at most once as a child.
    """

    leaf_ids: tuple[str, ...]
    merges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "leaf_ids", tuple(str(i) for i in self.leaf_ids))
        object.__setattr__(
            self, "merges", tuple((int(a), int(b), float(h)) for a, b, h in self.merges)
        )
        n = len(self.leaf_ids)
        if len(self.merges) != max(n - 1, 0):
            raise FormatError(f"{n} leaves require {n - 1} merges, got {len(self.merges)}")
        heights = [h for _, _, h in self.merges]
        if any(b < a for a, b in zip(heights, heights[1:])):
            raise FormatError("merge heights must be non-decreasing")
        children = [c for a, b, _ in self.merges for c in (a, b)]
        if len(children) != len(set(children)):
            raise FormatError("every cluster id may be merged away at most once")

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_ids)


def single_linkage(dist: DistanceMatrix) -> Dendrogram:
    """Agglomerative single-linkage clustering of a distance matrix."""
    n = dist.size
    d = dist.entries.copy()
    np.fill_diagonal(d, np.inf)
    cluster_ids = list(range(n))  # cluster id per active row
    reps = list(range(n))  # smallest contained item index per active row
    merges = []
    for step in range(n - 1):
        m = d.min()
        # tie-break on the smallest representative pair
        cand = np.argwhere(d == m)
        best = None
        for i, j in cand:
            if i >= j:
                continue
            key = (min(reps[i], reps[j]), max(reps[i], reps[j]))
            if best is None or key < best[0]:
                best = (key, i, j)
        _, i, j = best
        a, b = sorted((cluster_ids[i], cluster_ids[j]))
        merges.append((a, b, float(m)))

        row = np.minimum(d[i], d[j])
        d[i, :] = row
        d[:, i] = row
        d[i, i] = np.inf
        reps[i] = min(reps[i], reps[j])
        cluster_ids[i] = n + step
        d = np.delete(np.delete(d, j, axis=0), j, axis=1)
        del cluster_ids[j], reps[j]
    return Dendrogram(dist.item_ids, tuple(merges))


@dataclass(frozen=True)
class ClusterLabels:
    """Assignment of item ids to contiguous cluster indices starting at 0."""

    assignment: Mapping[str, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", dict(self.assignment))
        indices = set(self.assignment.values())
        if indices and indices != set(range(len(indices))):
            raise FormatError(f"cluster indices must be contiguous from 0, got {sorted(indices)}")

    @property
    def n_clusters(self) -> int:
        return len(set(self.assignment.values()))

    def as_array(self, order: Sequence[str]) -> np.ndarray:
        return np.array([self.assignment[str(i)] for i in order], dtype=int)


def _labels_from_applied(dend: Dendrogram, n_applied: int) -> ClusterLabels:
    n = dend.n_leaves
    members = {i: [i] for i in range(n)}
    for step in range(n_applied):
        a, b, _ = dend.merges[step]
        members[n + step] = members.pop(a) + members.pop(b)
    groups = sorted(members.values(), key=min)
    assignment = {}
    for idx, group in enumerate(groups):
        for item in group:
            assignment[dend.leaf_ids[item]] = idx
    return ClusterLabels(assignment)


def cut(
    dend: Dendrogram,
    num_clusters: Optional[int] = None,
    height: Optional[float] = None,
) -> ClusterLabels:
    """Flat clusters from a dendrogram, by target count or by cutoff height.

    A ``num_clusters`` cut leaves the last ``k - 1`` merges undone; a
    ``height`` cut undoes every merge above the cutoff.  Clusters are
    numbered by their smallest contained item index.
    """
    if (num_clusters is None) == (height is None):
        raise ConfigurationError("specify exactly one of num_clusters or height")
    n = dend.n_leaves
    if num_clusters is not None:
        if not 1 <= num_clusters <= n:
            raise ConfigurationError(f"num_clusters must lie in [1, {n}], got {num_clusters}")
        applied = n - num_clusters
    else:
        if height < 0:
            raise ConfigurationError(f"cut height must be >= 0, got {height}")
        applied = sum(1 for _, _, h in dend.merges if h <= height)
    return _labels_from_applied(dend, applied)


def confusion(labels: ClusterLabels, truth: ClusterLabels) -> tuple[np.ndarray, float]:
    """Confusion matrix (rows: ground truth, columns: predicted) and accuracy.

    Accuracy counts items on an optimal one-to-one matching of predicted to
    truth clusters (padded square assignment problem), so it is well defined
    when the cluster counts differ and invariant under relabeling.
    """
    if set(labels.assignment) != set(truth.assignment):
        raise ConfigurationError("labels and truth must cover the same items")
    n_true = truth.n_clusters
    n_pred = labels.n_clusters
    counts = np.zeros((n_true, n_pred), dtype=int)
    for item, pred in labels.assignment.items():
        counts[truth.assignment[item], pred] += 1
    side = max(n_true, n_pred)
    padded = np.zeros((side, side), dtype=int)
    padded[:n_true, :n_pred] = counts
    rows, cols = linear_sum_assignment(padded, maximize=True)
    accuracy = padded[rows, cols].sum() / len(labels.assignment)
    return counts, float(accuracy)
