"""Motion plans represented as piecewise polynomials with bounded codomains.

A motion plan pairs a multi-dimensional state trajectory with a (possibly
empty) control trajectory over a common time domain ``[0, t_f]``.  Each
scalar dimension is a :class:`PiecewisePolynomial` of degree 1 or 3, stored
with segment-local coefficients: on segment ``i`` covering
``[breakpoints[i], breakpoints[i+1]]`` the value at local time
``tau = t - breakpoints[i]`` is ``sum_k c_k * tau**k``.  The local
convention matches collocation-solver output and avoids cancellation at
large ``t``.

All types are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DataError, DomainError, FormatError

# Continuity across interior breakpoints is required of the representation
# (not smoothness of the data): relative 1e-9 with the same absolute floor.
CONTINUITY_TOL = 1e-9

# Breakpoints of every dimension must cover [0, t_f] up to this slack.
TIME_ALIGNMENT_TOL = 1e-9

SUPPORTED_DEGREES = (1, 3)


@dataclass(frozen=True)
class DimensionBounds:
    """Box constraint ``[lower, upper]`` on the codomain of one dimension."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise FormatError(f"bounds must be finite, got [{self.lower}, {self.upper}]")
        if not self.lower < self.upper:
            raise FormatError(f"bounds require lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def span(self) -> float:
        return self.upper - self.lower

    def clamp(self, value: float) -> float:
        return min(max(value, self.lower), self.upper)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """One scalar trajectory dimension.

    Parameters
    ----------
    breakpoints:
        Strictly increasing times, length ``n_segments + 1``.
    coefficients:
        ``(n_segments, degree + 1)`` array of segment-local coefficients
        ``c0..c_d`` (low order first).
    """

    breakpoints: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", _readonly(self.breakpoints))
        object.__setattr__(self, "coefficients", _readonly(np.atleast_2d(self.coefficients)))
        bp, C = self.breakpoints, self.coefficients
        if bp.ndim != 1 or bp.size < 2:
            raise FormatError("breakpoints must be a 1-D array with at least 2 entries")
        if not np.all(np.isfinite(bp)) or not np.all(np.isfinite(C)):
            raise FormatError("breakpoints and coefficients must be finite")
        if np.any(np.diff(bp) <= 0):
            raise FormatError("breakpoints must be strictly increasing")
        if C.shape[0] != bp.size - 1:
            raise FormatError(
                f"expected {bp.size - 1} coefficient rows for {bp.size} breakpoints, got {C.shape[0]}"
            )
        if C.shape[1] - 1 not in SUPPORTED_DEGREES:
            raise FormatError(f"degree must be one of {SUPPORTED_DEGREES}, got {C.shape[1] - 1}")
        self._check_continuity()

    def _check_continuity(self) -> None:
        bp, C = self.breakpoints, self.coefficients
        dt = np.diff(bp)
        for i in range(len(dt) - 1):
            left = _horner(C[i], dt[i])
            right = C[i + 1, 0]
            tol = CONTINUITY_TOL * max(1.0, abs(left), abs(right))
            if abs(left - right) > tol:
                raise DataError(
                    f"discontinuity at breakpoint t={bp[i + 1]!r}: "
                    f"segment {i} ends at {left!r}, segment {i + 1} starts at {right!r}"
                )

    @property
    def degree(self) -> int:
        return self.coefficients.shape[1] - 1

    @property
    def n_segments(self) -> int:
        return self.coefficients.shape[0]

    @property
    def start(self) -> float:
        return float(self.breakpoints[0])

    @property
    def end(self) -> float:
        return float(self.breakpoints[-1])

    def segment_index(self, t: float) -> int:
        """Index of the segment containing ``t`` (right segment at interior knots)."""
        bp = self.breakpoints
        if t < bp[0] or t > bp[-1]:
            raise DomainError(f"t={t!r} outside domain [{bp[0]!r}, {bp[-1]!r}]")
        i = int(np.searchsorted(bp, t, side="right")) - 1
        return min(i, self.n_segments - 1)

    def evaluate(self, t: float) -> float:
        i = self.segment_index(t)
        return _horner(self.coefficients[i], t - self.breakpoints[i])

    def evaluate_many(self, times: Sequence[float]) -> np.ndarray:
        """Vectorised evaluation; every time must lie in the domain."""
        ts = np.asarray(times, dtype=float)
        bp = self.breakpoints
        if ts.size and (ts.min() < bp[0] or ts.max() > bp[-1]):
            raise DomainError(f"times outside domain [{bp[0]!r}, {bp[-1]!r}]")
        idx = np.clip(np.searchsorted(bp, ts, side="right") - 1, 0, self.n_segments - 1)
        tau = ts - bp[idx]
        C = self.coefficients
        out = np.zeros_like(tau)
        for k in range(C.shape[1] - 1, -1, -1):
            out = out * tau + C[idx, k]
        return out

    def derivative_at(self, t: float) -> float:
        """Analytic derivative; at interior knots of linear splines the
        subderivative ``(m_left + m_right) / 2`` is returned."""
        bp = self.breakpoints
        if self.degree == 1:
            j = int(np.searchsorted(bp, t))
            if 0 < j < bp.size - 1 and bp[j] == t:
                return 0.5 * (self.coefficients[j - 1, 1] + self.coefficients[j, 1])
        i = self.segment_index(t)
        return _poly_derivative(self.coefficients[i], t - bp[i])

    def scaled_time(self, factor: float) -> "PiecewisePolynomial":
        """Reparameterise time by ``t -> factor * t`` preserving values."""
        powers = (1.0 / factor) ** np.arange(self.coefficients.shape[1])
        return PiecewisePolynomial(self.breakpoints * factor, self.coefficients * powers)


def _normalize_dimension(pp: PiecewisePolynomial, t_f: float) -> PiecewisePolynomial:
    # endpoints are snapped exactly onto [0, 1]; the plan invariant keeps
    # them within 1e-9 already, so this only removes rounding residue
    bp = pp.breakpoints / t_f
    bp = bp.copy()
    bp[0] = 0.0
    bp[-1] = 1.0
    powers = t_f ** np.arange(pp.coefficients.shape[1])
    return PiecewisePolynomial(bp, pp.coefficients * powers)


def _horner(coeffs: np.ndarray, tau: float) -> float:
    acc = 0.0
    for c in coeffs[::-1]:
        acc = acc * tau + c
    return float(acc)


def _poly_derivative(coeffs: np.ndarray, tau: float) -> float:
    acc = 0.0
    for k in range(len(coeffs) - 1, 0, -1):
        acc = acc * tau + k * coeffs[k]
    return float(acc)


def from_samples(times: Sequence[float], values: Sequence[float]) -> PiecewisePolynomial:
    """Linear spline interpolating ``(times, values)`` exactly."""
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ts.ndim != 1 or vs.ndim != 1 or ts.size != vs.size:
        raise FormatError("times and values must be 1-D sequences of equal length")
    if ts.size < 2:
        raise FormatError("need at least 2 samples to build a spline")
    if np.any(np.diff(ts) <= 0):
        raise FormatError("sample times must be strictly increasing")
    if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(vs))):
        raise FormatError("samples must be finite")
    slopes = np.diff(vs) / np.diff(ts)
    coeffs = np.column_stack([vs[:-1], slopes])
    return PiecewisePolynomial(ts, coeffs)


@dataclass(frozen=True)
class MotionPlan:
    """State and control trajectories synchronized on ``[0, t_f]``.

    ``state_dims`` and ``control_dims`` hold ``(trajectory, bounds)`` pairs;
    ``bounds`` may be ``None`` for dimensions without known box constraints.
    Control-free plans (``m = 0``) are allowed.
    """

    name: str
    t_f: float
    state_dims: tuple[tuple[PiecewisePolynomial, Optional[DimensionBounds]], ...]
    control_dims: tuple[tuple[PiecewisePolynomial, Optional[DimensionBounds]], ...] = field(
        default=()
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "state_dims", tuple(tuple(d) for d in self.state_dims))
        object.__setattr__(self, "control_dims", tuple(tuple(d) for d in self.control_dims))
        if not (math.isfinite(self.t_f) and self.t_f > 0):
            raise FormatError(f"t_f must be positive and finite, got {self.t_f!r}")
        if len(self.state_dims) < 1:
            raise FormatError("a motion plan needs at least one state dimension")
        for dim_id, pp, _ in self.dimensions():
            if abs(pp.start) > TIME_ALIGNMENT_TOL or abs(pp.end - self.t_f) > TIME_ALIGNMENT_TOL:
                raise FormatError(
                    f"dimension {dim_id}: breakpoints span [{pp.start!r}, {pp.end!r}], "
                    f"expected [0, {self.t_f!r}]"
                )

    @property
    def n_state(self) -> int:
        return len(self.state_dims)

    @property
    def n_control(self) -> int:
        return len(self.control_dims)

    def dimensions(
        self,
    ) -> Iterator[tuple[str, PiecewisePolynomial, Optional[DimensionBounds]]]:
        """Yield ``(dim_id, trajectory, bounds)``, state dims first."""
        for i, (pp, bounds) in enumerate(self.state_dims):
            yield f"s{i}", pp, bounds
        for i, (pp, bounds) in enumerate(self.control_dims):
            yield f"c{i}", pp, bounds

    def dimension_ids(self) -> tuple[str, ...]:
        return tuple(dim_id for dim_id, _, _ in self.dimensions())


def normalize_time(plan: MotionPlan) -> MotionPlan:
    """Rescale the plan to ``t_f = 1`` preserving all values (slopes scale by ``t_f``)."""
    if plan.t_f == 1.0:
        return plan

    def scale(dims):
        return tuple((_normalize_dimension(pp, plan.t_f), bounds) for pp, bounds in dims)

    return MotionPlan(
        name=plan.name,
        t_f=1.0,
        state_dims=scale(plan.state_dims),
        control_dims=scale(plan.control_dims),
    )
