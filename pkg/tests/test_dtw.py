"""Tests for the DTW baseline on sampled trajectories."""

import numpy as np
import pytest

from trajseq import (
    ConfigurationError,
    DimensionBounds,
    FormatError,
    MotionPlan,
    SampledSeries,
    dtw_distance,
    from_samples,
    sample,
)


def series(*rows):
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    return SampledSeries(rows, tuple(f"s{i}" for i in range(rows.shape[1])))


class TestSample:
    def test_linear_ramp(self):
        plan = MotionPlan("p", 1.0, ((from_samples([0, 1], [0, 1]), None),))
        got = sample(plan, 3)
        assert got.values[:, 0] == pytest.approx([0.0, 0.5, 1.0])
        assert got.dimension_ids == ("s0",)

    def test_constant_plan(self):
        plan = MotionPlan("p", 1.0, ((from_samples([0, 1], [0.7, 0.7]), None),))
        assert sample(plan, 5).values[:, 0] == pytest.approx([0.7] * 5)

    def test_two_sample_endpoints(self):
        plan = MotionPlan("p", 2.0, ((from_samples([0, 2], [3, -1]), None),))
        assert sample(plan, 2).values[:, 0] == pytest.approx([3.0, -1.0])

    def test_concatenates_state_and_control(self):
        plan = MotionPlan(
            "p",
            1.0,
            ((from_samples([0, 1], [0, 1]), None),),
            ((from_samples([0, 1], [1, 0]), DimensionBounds(-1, 1)),),
        )
        got = sample(plan, 3)
        assert got.values.shape == (3, 2)
        assert got.dimension_ids == ("s0", "c0")

    def test_count_validated(self):
        plan = MotionPlan("p", 1.0, ((from_samples([0, 1], [0, 1]), None),))
        with pytest.raises(ConfigurationError):
            sample(plan, 1)


class TestDtwDistance:
    def test_identical_series(self):
        a = series(0, 0.5, 1)
        assert dtw_distance(a, a) == 0.0

    def test_warping_aligns_perfectly(self):
        assert dtw_distance(series(0, 0, 1), series(0, 1, 1)) == 0.0

    def test_shifted_constant(self):
        assert dtw_distance(series(0, 0), series(1, 1)) == 2.0

    def test_symmetry_and_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = series(*rng.uniform(-1, 1, rng.integers(2, 30)))
            b = series(*rng.uniform(-1, 1, rng.integers(2, 30)))
            d1, d2 = dtw_distance(a, b), dtw_distance(b, a)
            assert d1 == d2
            assert d1 >= 0.0

    def test_bounded_by_diagonal_path(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 40))
            va = rng.uniform(-1, 1, n)
            vb = rng.uniform(-1, 1, n)
            assert dtw_distance(series(*va), series(*vb)) <= np.abs(va - vb).sum() + 1e-12

    def test_multivariate_joint_cost(self):
        a = SampledSeries(np.array([[0.0, 0.0], [1.0, 1.0]]), ("s0", "s1"))
        b = SampledSeries(np.array([[0.0, 0.0], [1.0, 0.0]]), ("s0", "s1"))
        # costs: (0,0)->0, (1,1)vs(1,0)->1; optimal path diag: 0 + 1
        assert dtw_distance(a, b) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        a = series(0, 1)
        b = SampledSeries(np.array([[0.0, 0.0]]), ("s0", "s1"))
        with pytest.raises(ConfigurationError):
            dtw_distance(a, b)


class TestSampledSeries:
    def test_rejects_nonfinite(self):
        with pytest.raises(FormatError):
            SampledSeries(np.array([[np.nan]]), ("s0",))

    def test_rejects_id_mismatch(self):
        with pytest.raises(FormatError):
            SampledSeries(np.zeros((3, 2)), ("s0",))
