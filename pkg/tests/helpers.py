"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from trajseq import (
    DimensionBounds,
    FeatureElement,
    FeatureSequence,
    PiecewisePolynomial,
    from_samples,
)

ORACLE_GRID = 10_000


def make_seq(labels, times=None, saliences=None, dim="d0"):
    n = len(labels)
    if times is None:
        times = [0.0] * n if n <= 1 else [i / (n - 1) for i in range(n)]
    if saliences is None:
        saliences = [1.0] * n
    return FeatureSequence(
        dim, tuple(FeatureElement(l, t, s) for l, t, s in zip(labels, times, saliences))
    )


def random_sequence(rng, alphabet=("a", "b", "c"), max_len=6, dim="d0"):
    n = int(rng.integers(0, max_len + 1))
    labels = [alphabet[i] for i in rng.integers(0, len(alphabet), n)]
    times = np.sort(rng.uniform(0.0, 1.0, n))
    sal = rng.uniform(0.0, 1.0, n)
    return make_seq(labels, times.tolist(), sal.tolist(), dim=dim)


def hermite_spline(knots, values, slopes) -> PiecewisePolynomial:
    """Cubic Hermite interpolant (C1) through value/slope samples."""
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    slopes = np.asarray(slopes, dtype=float)
    dt = np.diff(knots)
    dv = np.diff(values)
    m0, m1 = slopes[:-1], slopes[1:]
    c2 = (3.0 * dv / dt - 2.0 * m0 - m1) / dt
    c3 = (m0 + m1 - 2.0 * dv / dt) / dt**2
    return PiecewisePolynomial(knots, np.column_stack([values[:-1], m0, c2, c3]))


def random_knots(rng, lo=4, hi=12, min_gap=5e-3):
    while True:
        n = int(rng.integers(lo, hi + 1))
        ts = np.sort(rng.uniform(0.0, 1.0, n))
        ts[0], ts[-1] = 0.0, 1.0
        if np.all(np.diff(ts) >= min_gap):
            return ts


def random_linear_spline(rng) -> PiecewisePolynomial:
    ts = random_knots(rng)
    return from_samples(ts, rng.uniform(-1.0, 1.0, ts.size))


def random_trig_function(rng, n_terms=3, max_freq=3.0):
    """Smooth random function on [0, 1] with bounded curvature."""
    amps = rng.uniform(-0.5, 0.5, n_terms)
    freqs = rng.uniform(0.5, max_freq, n_terms) * math.pi
    phases = rng.uniform(0.0, 2.0 * math.pi, n_terms)

    def f(t):
        t = np.asarray(t, dtype=float)
        return sum(a * np.sin(w * t + p) for a, w, p in zip(amps, freqs, phases))

    def fprime(t):
        t = np.asarray(t, dtype=float)
        return sum(a * w * np.cos(w * t + p) for a, w, p in zip(amps, freqs, phases))

    return f, fprime


def random_cubic_spline(rng) -> PiecewisePolynomial:
    ts = random_knots(rng, lo=5, hi=10, min_gap=0.02)
    f, fp = random_trig_function(rng)
    return hermite_spline(ts, f(ts), fp(ts))


def oracle_prominence(pp, extremum, bounds) -> float:
    """Dense-grid contour search, independent of the analytic base search."""
    t_m, cls, value = extremum
    is_min = str(getattr(cls, "value", cls)) == "min"
    ts = np.unique(
        np.concatenate([np.linspace(pp.start, pp.end, ORACLE_GRID + 1), pp.breakpoints, [t_m]])
    )
    vs = pp.evaluate_many(ts)
    v = -value if is_min else value
    gv = -vs if is_min else vs
    i = int(np.searchsorted(ts, t_m))
    bases = []
    for side in (range(i - 1, -1, -1), range(i + 1, len(ts))):
        run = v
        higher = False
        for j in side:
            if gv[j] > v:
                higher = True
                break
            run = min(run, gv[j])
        if higher or run < v:
            bases.append(run)
    raw = max(v - max(bases), 0.0) if bases else 0.0
    if bounds is None:
        return (2.0 / math.pi) * math.atan(raw)
    return min(raw / bounds.span, 1.0)


def dense_sign_crossings(pp, grid=20_001) -> int:
    """Independent count of sign-change zero crossings."""
    vs = pp.evaluate_many(np.linspace(pp.start, pp.end, grid))
    signs = np.sign(vs)
    signs = signs[signs != 0]
    return int(np.sum(signs[:-1] != signs[1:]))


def subsequence_profile(seq: FeatureSequence) -> dict[str, int]:
    """How often each label string occurs as a subsequence (unit weights)."""
    labels = seq.labels()
    counts: dict[str, int] = {}
    for p in range(1, len(labels) + 1):
        for chain in combinations(range(len(labels)), p):
            key = "".join(labels[i] for i in chain)
            counts[key] = counts.get(key, 0) + 1
    return counts


def bounds(lo=-1.6, hi=1.6) -> DimensionBounds:
    return DimensionBounds(lo, hi)
