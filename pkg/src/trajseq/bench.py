"""Timing harness comparing feature-based and DTW distance computation.

Feature extraction is a precomputation step that runs once per plan, so it
is timed separately from the per-pair kernel distance; DTW is timed per
pair at several sample counts to expose its dependence on series length.
Medians (not means) are reported to resist scheduler noise.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .dtw import dtw_distance, sample
from .errors import ConfigurationError
from .features import ExtractionConfig, extract
from .seqkernel import KernelConfig, plan_distance
from .model import MotionPlan

DEFAULT_SAMPLE_COUNTS = (100, 1000, 10000)
DEFAULT_REPS = 20


@dataclass(frozen=True)
class BenchRow:
    kind: str  # "extract" | "kernel" | "dtw"
    subject: str  # plan name or "a vs b"
    detail: str  # feature counts or sample count
    median_seconds: float
    reps: int


def median_time(fn: Callable[[], object], reps: int) -> float:
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def run_benchmark(
    plans: Sequence[MotionPlan],
    extraction: Optional[ExtractionConfig] = None,
    kernel_cfg: Optional[KernelConfig] = None,
    sample_counts: Sequence[int] = DEFAULT_SAMPLE_COUNTS,
    reps: int = DEFAULT_REPS,
) -> list[BenchRow]:
    if len(plans) < 2:
        raise ConfigurationError("benchmark needs at least 2 plans")
    if reps < 1:
        raise ConfigurationError("reps must be >= 1")
    extraction = extraction or ExtractionConfig()
    kernel_cfg = kernel_cfg or KernelConfig()

    rows = []
    sequences = {}
    for plan in plans:
        seqs = extract(plan, extraction)
        sequences[plan.name] = seqs
        t = median_time(lambda p=plan: extract(p, extraction), reps)
        counts = ",".join(f"{s.dimension_id}={len(s)}" for s in seqs)
        rows.append(BenchRow("extract", plan.name, counts, t, reps))

    pairs = list(combinations(plans, 2))
    for a, b in pairs:
        sa, sb = sequences[a.name], sequences[b.name]
        t = median_time(lambda: plan_distance(sa, sb, kernel_cfg), reps)
        n_feat = f"{sum(len(s) for s in sa)}v{sum(len(s) for s in sb)} features"
        rows.append(BenchRow("kernel", f"{a.name} vs {b.name}", n_feat, t, reps))

    # sampling is DTW precomputation and excluded from the timed section
    warm = sample(plans[0], 4)
    dtw_distance(warm, warm)  # trigger JIT compilation outside the timers
    for count in sample_counts:
        series = {p.name: sample(p, count) for p in plans}
        for a, b in pairs:
            va, vb = series[a.name], series[b.name]
            t = median_time(lambda: dtw_distance(va, vb), reps)
            rows.append(BenchRow("dtw", f"{a.name} vs {b.name}", f"K={count}", t, reps))
    return rows


def rows_to_csv(rows: Sequence[BenchRow], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "subject", "detail", "median_seconds", "reps"])
        for r in rows:
            writer.writerow([r.kind, r.subject, r.detail, repr(r.median_seconds), r.reps])


def format_table(rows: Sequence[BenchRow]) -> str:
    widths = [
        max(len("kind"), *(len(r.kind) for r in rows)),
        max(len("subject"), *(len(r.subject) for r in rows)),
        max(len("detail"), *(len(r.detail) for r in rows)),
    ]
    lines = [
        f"{'kind':<{widths[0]}}  {'subject':<{widths[1]}}  {'detail':<{widths[2]}}  "
        f"{'median':>12}  reps"
    ]
    for r in rows:
        lines.append(
            f"{r.kind:<{widths[0]}}  {r.subject:<{widths[1]}}  {r.detail:<{widths[2]}}  "
            f"{r.median_seconds:>10.3e}s  {r.reps:>4}"
        )
    return "\n".join(lines)
