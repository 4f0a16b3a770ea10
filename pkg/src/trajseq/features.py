"""Reduce trajectory dimensions to sequences of salient features.

Each dimension of a motion plan is compressed to a time-ordered list of
``(class, time, salience)`` triplets:

* ``max`` / ``min`` — local extrema, weighted by normalized topographic
  prominence,
* ``ub`` / ``lb``  — arcs where the trajectory rides its upper/lower box
  constraint, merged into one event at the arc center and weighted like an
  extremum,
* ``root``         — sign-change zero crossings, weighted by
  ``(2/pi) * |atan(slope)|`` of the crossing slope.

Times refer to the time-normalized plan, so they live in ``[0, 1]``;
saliences are clamped to ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import FormatError
from .model import DimensionBounds, MotionPlan, PiecewisePolynomial, normalize_time


class FeatureClass(str, Enum):
    MAX = "max"
    MIN = "min"
    ROOT = "root"
    UPPER_BOUND = "ub"
    LOWER_BOUND = "lb"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


ALL_CLASSES = frozenset(FeatureClass)
EXTREMUM_CLASSES = frozenset({FeatureClass.MAX, FeatureClass.MIN})
CONSTRAINT_CLASSES = frozenset({FeatureClass.UPPER_BOUND, FeatureClass.LOWER_BOUND})

# Deterministic ordering for features sharing a timestamp.
_CLASS_SORT_ORDER = {c: i for i, c in enumerate(FeatureClass)}


@dataclass(frozen=True)
class FeatureElement:
    """One salient event of a trajectory dimension.

    Extraction emits the closed :class:`FeatureClass` alphabet; for generic
    alphabets (the kernel accepts any categorical labels) an opaque string
    may be used instead.
    """

    feature_class: Union[FeatureClass, str]
    time: float
    salience: float

    def __post_init__(self) -> None:
        fc = self.feature_class
        if not isinstance(fc, FeatureClass):
            try:
                fc = FeatureClass(fc)
            except ValueError:
                fc = str(fc)
        object.__setattr__(self, "feature_class", fc)
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "salience", float(self.salience))
        if not 0.0 <= self.time <= 1.0:
            raise FormatError(f"feature time must lie in [0, 1], got {self.time!r}")
        if not self.salience >= 0.0:
            raise FormatError(f"salience must be >= 0, got {self.salience!r}")

    @property
    def label(self) -> str:
        fc = self.feature_class
        return fc.value if isinstance(fc, FeatureClass) else fc


@dataclass(frozen=True)
class FeatureSequence:
    """Time-ordered features of one dimension; may be empty."""

    dimension_id: str
    elements: tuple[FeatureElement, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        times = [e.time for e in self.elements]
        if any(b < a for a, b in zip(times, times[1:])):
            raise FormatError(f"dimension {self.dimension_id}: feature times must be non-decreasing")

    def __len__(self) -> int:
        return len(self.elements)

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.elements)

    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.elements], dtype=float)

    def saliences(self) -> np.ndarray:
        return np.array([e.salience for e in self.elements], dtype=float)


ClassSpec = Union[frozenset, set, Sequence]


@dataclass(frozen=True)
class ExtractionConfig:
    """Feature extraction parameters.

    ``enabled_classes`` is either one collection of :class:`FeatureClass`
    applied to every dimension, or a mapping ``dim_id -> collection`` for
    per-dimension selections (missing ids fall back to all classes).
    """

    enabled_classes: Union[ClassSpec, Mapping[str, ClassSpec]] = field(default=ALL_CLASSES)
    prominence_threshold: float = 0.02
    constraint_epsilon_rel: float = 0.01

    def __post_init__(self) -> None:
        if self.prominence_threshold < 0:
            raise FormatError("prominence_threshold must be >= 0")
        if not 0 < self.constraint_epsilon_rel < 0.5:
            raise FormatError("constraint_epsilon_rel must lie in (0, 0.5)")
        if not isinstance(self.enabled_classes, Mapping):
            object.__setattr__(
                self, "enabled_classes", frozenset(FeatureClass(c) for c in self.enabled_classes)
            )

    def classes_for(self, dim_id: str) -> frozenset:
        if isinstance(self.enabled_classes, Mapping):
            spec = self.enabled_classes.get(dim_id, ALL_CLASSES)
            return frozenset(FeatureClass(c) for c in spec)
        return self.enabled_classes


# ---------------------------------------------------------------------------
# extrema


def _sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    """Real roots of ``a x^2 + b x + c``; double roots are dropped."""
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    else:
        roots.append(0.0)
    return roots


def _segment_extrema(pp: PiecewisePolynomial) -> list[tuple[float, FeatureClass, float]]:
    """Strict in-segment extrema of a cubic spline."""
    out = []
    bp, C = pp.breakpoints, pp.coefficients
    for i in range(pp.n_segments):
        c0, c1, c2, c3 = C[i]
        dt = bp[i + 1] - bp[i]
        for tau in _quadratic_roots(3.0 * c3, 2.0 * c2, c1):
            if not 0.0 < tau < dt:
                continue
            curv = 2.0 * c2 + 6.0 * c3 * tau
            if curv == 0.0:
                continue  # inflection
            cls = FeatureClass.MAX if curv < 0 else FeatureClass.MIN
            value = ((c3 * tau + c2) * tau + c1) * tau + c0
            out.append((float(bp[i] + tau), cls, float(value)))
    out.sort(key=lambda e: e[0])
    return out


def find_extrema(pp: PiecewisePolynomial) -> list[tuple[float, FeatureClass, float]]:
    """Local extrema as ``(time, class, value)``, sorted by time.

    Linear splines: interior knots where the slope sign flips; zero-slope
    plateau segments are skipped and the first knot of the plateau carries
    the feature.  Cubic splines: strict interior roots of the quadratic
    derivative, classified by the second derivative.  Domain endpoints are
    never extrema.
    """
    if pp.degree == 3:
        return _segment_extrema(pp)

    bp, C = pp.breakpoints, pp.coefficients
    slopes = C[:, 1]
    out = []
    last_sign = 0
    pending_knot = 0
    for i, s in enumerate(slopes):
        sgn = _sign(s)
        if sgn == 0:
            continue
        if last_sign != 0 and sgn != last_sign:
            cls = FeatureClass.MAX if last_sign > 0 else FeatureClass.MIN
            t = float(bp[pending_knot])
            out.append((t, cls, pp.evaluate(t)))
        last_sign = sgn
        pending_knot = i + 1
    return out


# ---------------------------------------------------------------------------
# prominence


def _critical_grid(pp: PiecewisePolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Times/values at which the trajectory can change monotonicity.

    Knots plus (for cubics) strict in-segment extremum times; between
    consecutive grid points the trajectory is monotone, which makes the
    base search below exact.
    """
    times = list(pp.breakpoints)
    if pp.degree == 3:
        times.extend(t for t, _, _ in _segment_extrema(pp))
    ts = np.array(sorted(times), dtype=float)
    return ts, pp.evaluate_many(ts)


def prominence(
    pp: PiecewisePolynomial,
    extremum: tuple[float, FeatureClass, float],
    bounds: Optional[DimensionBounds],
    summit_span: Optional[tuple[float, float]] = None,
) -> float:
    """Normalized topographic prominence of an extremum in ``[0, 1]``.

    On each side of the summit the base is the minimum of the trajectory
    up to the nearest point with a value above the summit (or up to the
    domain end when no higher ground exists).  The raw prominence,
    ``value - max(bases)``, is divided by the bound span; without bounds
    it is squashed through ``(2/pi) * atan``.

    Minima are scored as maxima of the negated trajectory.  For constraint
    arcs pass ``summit_span`` so the base search starts at the ends of the
    arc instead of at its center; a side the summit fully covers imposes
    no base.
    """
    t_m, cls, value = extremum
    negate = cls in (FeatureClass.MIN, FeatureClass.LOWER_BOUND)
    grid_t, grid_v = _critical_grid(pp)
    v = -value if negate else value
    gv = -grid_v if negate else grid_v
    lo, hi = summit_span if summit_span is not None else (t_m, t_m)

    bases = []
    for side_values in (gv[grid_t < lo][::-1], gv[grid_t > hi]):
        if side_values.size == 0:
            continue  # summit touches the domain boundary on this side
        run_min = v
        found_higher = False
        for val in side_values:
            if val > v:
                found_higher = True
                break
            run_min = min(run_min, val)
        if found_higher or run_min < v:
            bases.append(run_min)
        # else: the summit plateau extends to the boundary -> no base

    if bases:
        raw = v - max(bases)
    elif bounds is not None:
        # Summit covers the whole domain (fully saturated arc): score it
        # against the opposite bound.
        raw = (value - bounds.lower) if not negate else (bounds.upper - value)
    else:
        raw = 0.0
    raw = max(raw, 0.0)

    if bounds is None:
        return float((2.0 / math.pi) * math.atan(raw))
    return float(min(raw / bounds.span, 1.0))


# ---------------------------------------------------------------------------
# active box constraints


@dataclass(frozen=True)
class ConstraintArc:
    """Internal record of one active-constraint run (span kept for suppression)."""

    center: float
    feature_class: FeatureClass
    salience: float
    start: float
    end: float


def _checkpoints(pp: PiecewisePolynomial) -> np.ndarray:
    ts = list(pp.breakpoints)
    if pp.degree == 3:
        ts.extend(t for t, _, _ in _segment_extrema(pp))
    return np.array(sorted(ts), dtype=float)


def _arc_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def constrained_arcs(
    pp: PiecewisePolynomial, bounds: DimensionBounds, epsilon: float
) -> list[ConstraintArc]:
    """Maximal runs of check-points within ``epsilon`` of a bound.

    Check-points are the knots (plus extremum times for cubics).  Each run
    becomes one event at the midpoint of its first and last check-point,
    scored as the prominence of the arc treated as a single extremum whose
    value is the trajectory value at the arc center clamped to the bound.
    Like extrema, a touch confined to a single check-point at a domain
    endpoint is not an event.
    """
    ts = _checkpoints(pp)
    vs = pp.evaluate_many(ts)
    out = []
    for cls, mask in (
        (FeatureClass.UPPER_BOUND, bounds.upper - vs < epsilon),
        (FeatureClass.LOWER_BOUND, vs - bounds.lower < epsilon),
    ):
        for first, last in _arc_runs(mask):
            if first == last and first in (0, len(ts) - 1):
                continue
            start, end = float(ts[first]), float(ts[last])
            center = 0.5 * (start + end)
            value = bounds.clamp(pp.evaluate(center))
            sal = prominence(pp, (center, cls, value), bounds, summit_span=(start, end))
            out.append(ConstraintArc(center, cls, sal, start, end))
    out.sort(key=lambda a: a.center)
    return out


def find_constrained_arcs(
    pp: PiecewisePolynomial, bounds: DimensionBounds, epsilon: float
) -> list[tuple[float, FeatureClass, float]]:
    return [(a.center, a.feature_class, a.salience) for a in constrained_arcs(pp, bounds, epsilon)]


# ---------------------------------------------------------------------------
# roots


def _segment_roots(coeffs: np.ndarray, dt: float) -> list[float]:
    """Real roots of one segment polynomial in ``[0, dt)``."""
    cs = list(coeffs)
    while cs and cs[-1] == 0.0:
        cs.pop()
    if len(cs) <= 1:
        return []  # identically zero or constant segment
    if len(cs) == 2:
        roots = [-cs[0] / cs[1]]
    else:
        roots = [float(r.real) for r in np.roots(cs[::-1]) if abs(r.imag) < 1e-9]
    return [r for r in roots if -1e-12 <= r < dt * (1.0 - 1e-12)]


def find_roots(
    pp: PiecewisePolynomial, bounds: Optional[DimensionBounds]
) -> list[tuple[float, FeatureClass, float]]:
    """Sign-change zero crossings as ``(time, ROOT, salience)``.

    Tangential touches and identically-zero segments contribute nothing;
    domain endpoints are excluded.  Salience follows
    ``(2/pi) * |atan(m / span)|`` with the slope of the time-normalized
    trajectory (subderivative at linear knots) scaled by the bound span
    (raw slope when unbounded).
    """
    bp, C = pp.breakpoints, pp.coefficients
    candidates = []
    for i in range(pp.n_segments):
        dt = bp[i + 1] - bp[i]
        candidates.extend(bp[i] + tau for tau in _segment_roots(C[i], dt))
    candidates.sort()

    # dedupe near-identical knot roots and drop domain endpoints
    t0, t1 = pp.start, pp.end
    tol = 1e-9 * max(1.0, t1 - t0)
    unique = []
    for t in candidates:
        if t - t0 <= tol or t1 - t <= tol:
            continue
        if unique and t - unique[-1] <= tol:
            continue
        unique.append(t)

    scale = bounds.span if bounds is not None else 1.0
    out = []
    fence = [t0, *unique, t1]
    for k, t in enumerate(unique):
        delta = 0.5 * min(t - fence[k], fence[k + 2] - t)
        before = pp.evaluate(t - delta)
        after = pp.evaluate(t + delta)
        if _sign(before) * _sign(after) >= 0:
            continue  # tangential touch or zero run
        m_hat = pp.derivative_at(t) / scale
        sal = (2.0 / math.pi) * abs(math.atan(m_hat))
        out.append((float(t), FeatureClass.ROOT, sal))
    return out


# ---------------------------------------------------------------------------
# whole-plan extraction


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def extract(plan: MotionPlan, config: Optional[ExtractionConfig] = None) -> list[FeatureSequence]:
    """Feature sequences for every dimension of a (time-normalized) plan.

    Extrema and constraint arcs with salience below
    ``config.prominence_threshold`` are discarded; extrema falling inside a
    surviving constraint arc are suppressed in favour of the arc so each
    event yields a single feature.  Constraint extraction is skipped for
    unbounded dimensions.
    """
    config = config or ExtractionConfig()
    plan = normalize_time(plan)
    threshold = config.prominence_threshold
    sequences = []
    for dim_id, pp, bounds in plan.dimensions():
        classes = config.classes_for(dim_id)
        elements: list[FeatureElement] = []

        arcs: list[ConstraintArc] = []
        if bounds is not None and classes & CONSTRAINT_CLASSES:
            epsilon = config.constraint_epsilon_rel * bounds.span
            arcs = [
                a for a in constrained_arcs(pp, bounds, epsilon) if a.feature_class in classes
            ]
            elements.extend(
                FeatureElement(a.feature_class, _clamp01(a.center), _clamp01(a.salience))
                for a in arcs
                if a.salience >= threshold
            )

        if classes & EXTREMUM_CLASSES:
            for t, cls, value in find_extrema(pp):
                if cls not in classes:
                    continue
                # suppression is independent of the threshold so that raising
                # the threshold can only remove features, never add them
                if any(a.start <= t <= a.end for a in arcs):
                    continue
                sal = prominence(pp, (t, cls, value), bounds)
                if sal >= threshold:
                    elements.append(FeatureElement(cls, _clamp01(t), _clamp01(sal)))

        if FeatureClass.ROOT in classes:
            elements.extend(
                FeatureElement(cls, _clamp01(t), _clamp01(sal))
                for t, cls, sal in find_roots(pp, bounds)
            )

        elements.sort(key=lambda e: (e.time, _CLASS_SORT_ORDER[e.feature_class]))
        sequences.append(FeatureSequence(dim_id, tuple(elements)))
    return sequences
