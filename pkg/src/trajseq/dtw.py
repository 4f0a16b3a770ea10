"""Dynamic-time-warping baseline on sampled raw trajectories.

Dependent (joint-Euclidean) DTW over all dimensions at once, unit step
pattern ``{(1,0), (0,1), (1,1)}``, no window.  Runtime is ``O(N * M)`` in
the sample counts, which is exactly the scaling the feature-sequence
distance avoids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError, FormatError
from .model import MotionPlan, normalize_time

DEFAULT_SAMPLE_COUNT = 150


@dataclass(frozen=True)
class SampledSeries:
    """Uniformly sampled trajectory values, one column per dimension."""

    values: np.ndarray
    dimension_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.atleast_2d(np.array(self.values, dtype=float))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dimension_ids", tuple(self.dimension_ids))
        if values.shape[0] < 1:
            raise FormatError("sampled series needs at least one time step")
        if values.shape[1] != len(self.dimension_ids):
            raise FormatError(
                f"{values.shape[1]} columns but {len(self.dimension_ids)} dimension ids"
            )
        if not np.all(np.isfinite(values)):
            raise FormatError("sampled series must be finite")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


def sample(plan: MotionPlan, count: int = DEFAULT_SAMPLE_COUNT) -> SampledSeries:
    """Evaluate the time-normalized plan at ``count`` uniform times in [0, 1]."""
    if count < 2:
        raise ConfigurationError(f"sample count must be >= 2, got {count}")
    plan = normalize_time(plan)
    times = np.linspace(0.0, 1.0, count)
    columns = [pp.evaluate_many(times) for _, pp, _ in plan.dimensions()]
    return SampledSeries(np.column_stack(columns), plan.dimension_ids())


@njit(cache=True)
def _dtw_cost(a, b):  # pragma: no cover - exercised through dtw_distance
    n, m = a.shape[0], b.shape[0]
    d = a.shape[1]
    prev = np.empty(m)
    curr = np.empty(m)
    big = np.inf
    for i in range(n):
        for j in range(m):
            cost = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                cost += diff * diff
            cost = np.sqrt(cost)
            if i == 0 and j == 0:
                curr[j] = cost
            else:
                best = big
                if i > 0:
                    if prev[j] < best:
                        best = prev[j]
                    if j > 0 and prev[j - 1] < best:
                        best = prev[j - 1]
                if j > 0 and curr[j - 1] < best:
                    best = curr[j - 1]
                curr[j] = cost + best
        prev, curr = curr, prev
    return prev[m - 1]


def dtw_distance(a: SampledSeries, b: SampledSeries) -> float:
    """Accumulated cost of the optimal warping path between two series."""
    if a.values.shape[1] != b.values.shape[1]:
        raise ConfigurationError(
            f"dimension mismatch: {a.values.shape[1]} vs {b.values.shape[1]}"
        )
    return float(
        _dtw_cost(np.ascontiguousarray(a.values), np.ascontiguousarray(b.values))
    )
