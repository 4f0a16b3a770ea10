"""Tests for piecewise polynomials and motion plans."""

import numpy as np
import pytest

from trajseq import (
    DataError,
    DimensionBounds,
    DomainError,
    FormatError,
    MotionPlan,
    PiecewisePolynomial,
    from_samples,
    normalize_time,
)

from helpers import hermite_spline, random_cubic_spline, random_linear_spline


def cubic(breakpoints, coeffs):
    return PiecewisePolynomial(np.asarray(breakpoints, float), np.asarray(coeffs, float))


class TestEvaluate:
    def test_cubic_segment(self):
        pp = cubic([0, 1], [[0, 0, 0, 1]])
        assert pp.evaluate(0.5) == pytest.approx(0.125)

    def test_linear_constant_term(self):
        pp = PiecewisePolynomial([0, 1], [[2, -1]])
        assert pp.evaluate(0.0) == 2.0

    def test_linear_interpolation(self):
        pp = from_samples([0, 1], [-1, 1])
        assert pp.evaluate(0.75) == pytest.approx(0.5)

    def test_right_segment_at_interior_knot(self):
        pp = PiecewisePolynomial([0, 0.5, 1], [[0, 1], [0.5, -1]])
        assert pp.evaluate(0.5) == pytest.approx(0.5)
        assert pp.segment_index(0.5) == 1

    def test_domain_errors(self):
        pp = from_samples([0, 1], [0, 1])
        with pytest.raises(DomainError):
            pp.evaluate(-0.1)
        with pytest.raises(DomainError):
            pp.evaluate(1.1)
        with pytest.raises(DomainError):
            pp.evaluate_many([0.5, 2.0])

    def test_evaluate_many_matches_scalar(self):
        rng = np.random.default_rng(3)
        for maker in (random_linear_spline, random_cubic_spline):
            pp = maker(rng)
            ts = rng.uniform(0, 1, 64)
            many = pp.evaluate_many(ts)
            assert many == pytest.approx([pp.evaluate(t) for t in ts], abs=1e-12)


class TestDerivative:
    def test_cubic(self):
        pp = cubic([0, 1], [[0, 0, 0, 1]])
        assert pp.derivative_at(0.5) == pytest.approx(0.75)

    def test_linear_knot_subderivative(self):
        pp = from_samples([0, 0.5, 1], [0, 1, 1])
        assert pp.derivative_at(0.5) == pytest.approx(1.0)

    def test_linear_constant_slope(self):
        pp = PiecewisePolynomial([0, 1], [[5, -3]])
        for t in (0.0, 0.3, 1.0):
            assert pp.derivative_at(t) == -3.0

    def test_out_of_domain(self):
        pp = from_samples([0, 1], [0, 1])
        with pytest.raises(DomainError):
            pp.derivative_at(1.5)


class TestInvariants:
    def test_breakpoints_must_increase(self):
        with pytest.raises(FormatError):
            PiecewisePolynomial([0, 0, 1], [[0, 1], [0, 1]])

    def test_segment_count_must_match(self):
        with pytest.raises(FormatError):
            PiecewisePolynomial([0, 1], [[0, 1], [1, -1]])

    def test_degree_restricted(self):
        with pytest.raises(FormatError):
            PiecewisePolynomial([0, 1], [[0, 1, 2]])  # quadratic

    def test_continuity_checked(self):
        with pytest.raises(DataError):
            PiecewisePolynomial([0, 0.5, 1], [[0, 1], [99.0, 1]])

    def test_immutable_arrays(self):
        pp = from_samples([0, 1], [0, 1])
        with pytest.raises(ValueError):
            pp.breakpoints[0] = 5.0


class TestFromSamples:
    def test_single_segment(self):
        pp = from_samples([0, 1], [0, 1])
        assert pp.n_segments == 1
        assert pp.coefficients[0, 1] == pytest.approx(1.0)

    def test_two_segments_slopes(self):
        pp = from_samples([0, 0.5, 1], [0, 1, 0])
        assert pp.coefficients[:, 1] == pytest.approx([2.0, -2.0])

    def test_interpolation_contract(self):
        rng = np.random.default_rng(11)
        ts = np.sort(rng.uniform(0, 1, 9))
        ts[0], ts[-1] = 0, 1
        vs = rng.uniform(-2, 2, 9)
        pp = from_samples(ts, vs)
        assert pp.evaluate_many(ts) == pytest.approx(vs, abs=1e-12)

    @pytest.mark.parametrize(
        "times,values",
        [([0], [1]), ([0, 0], [1, 2]), ([1, 0], [0, 1]), ([0, 1], [0, 1, 2])],
    )
    def test_rejects_bad_input(self, times, values):
        with pytest.raises(FormatError):
            from_samples(times, values)


class TestBounds:
    def test_order_enforced(self):
        with pytest.raises(FormatError):
            DimensionBounds(1.0, 1.0)

    def test_span_and_clamp(self):
        b = DimensionBounds(-1.0, 3.0)
        assert b.span == 4.0
        assert b.clamp(5.0) == 3.0
        assert b.clamp(-9.0) == -1.0


class TestMotionPlan:
    def test_requires_state_dim(self):
        with pytest.raises(FormatError):
            MotionPlan("p", 1.0, ())

    def test_breakpoints_must_cover_domain(self):
        pp = from_samples([0, 0.5], [0, 1])
        with pytest.raises(FormatError):
            MotionPlan("p", 1.0, ((pp, None),))

    def test_control_free_plan(self):
        plan = MotionPlan("p", 1.0, ((from_samples([0, 1], [0, 1]), None),))
        assert plan.n_control == 0
        assert plan.dimension_ids() == ("s0",)

    def test_independent_grids_allowed(self):
        state = from_samples([0, 1, 2], [0, 1, 0])
        control = from_samples([0, 0.7, 1.3, 2], [0, 1, -1, 0])
        plan = MotionPlan("p", 2.0, ((state, None),), ((control, None),))
        assert plan.dimension_ids() == ("s0", "c0")


class TestNormalizeTime:
    def test_linear_example(self):
        plan = MotionPlan("p", 2.0, ((from_samples([0, 2], [0, 1]), None),))
        norm = normalize_time(plan)
        pp = norm.state_dims[0][0]
        assert norm.t_f == 1.0
        assert pp.breakpoints[-1] == 1.0
        assert pp.evaluate(1.0) == pytest.approx(1.0)
        assert pp.derivative_at(0.5) == pytest.approx(1.0)  # slope 0.5 -> 1.0

    def test_identity_when_normalized(self):
        plan = MotionPlan("p", 1.0, ((from_samples([0, 1], [0, 1]), None),))
        assert normalize_time(plan) is plan

    def test_cubic_value_preservation(self):
        pp = cubic([0, 2], [[0, 1, 0, 0]])
        plan = MotionPlan("p", 2.0, ((pp, None),))
        norm = normalize_time(plan)
        npp = norm.state_dims[0][0]
        ts = np.linspace(0, 2, 41)
        diff = np.abs(npp.evaluate_many(ts / 2.0) - pp.evaluate_many(ts))
        assert diff.max() < 1e-12

    def test_random_plans_preserved_and_idempotent(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            t_f = float(rng.uniform(0.3, 5.0))
            ts = np.sort(rng.uniform(0, 1, 7))
            ts[0], ts[-1] = 0, 1
            state = hermite_spline(ts * t_f, rng.uniform(-1, 1, 7), rng.uniform(-2, 2, 7))
            control = from_samples(ts * t_f, rng.uniform(-1, 1, 7))
            plan = MotionPlan("p", t_f, ((state, None),), ((control, None),))
            norm = normalize_time(plan)
            assert norm.t_f == 1.0
            for (pp, _), (npp, _) in zip(
                list(plan.state_dims) + list(plan.control_dims),
                list(norm.state_dims) + list(norm.control_dims),
            ):
                samples = rng.uniform(0, t_f, 100)
                orig = pp.evaluate_many(samples)
                scaled = npp.evaluate_many(samples / t_f)
                assert np.abs(scaled - orig).max() < 1e-9
            again = normalize_time(norm)
            assert again is norm
