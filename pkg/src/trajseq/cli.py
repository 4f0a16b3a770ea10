"""Command-line frontend: extract -> distance matrix -> cluster -> evaluate.

Subcommands: ``extract``, ``distance``, ``matrix``, ``cluster``,
``evaluate``, ``generate``, ``bench``.  Exit codes: 0 success, 1 internal
error, 2 user/input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bench as benchmod
from .cluster import ClusterLabels, confusion, cut, pairwise_matrix, single_linkage
from .data import (
    ManifestBundle,
    SyntheticFamilySpec,
    cluster_labels_from_names,
    generate_synthetic,
    load_labels_csv,
    load_plan_json,
    load_samples_csv,
    load_manifest,
    save_dendrogram_json,
    save_dendrogram_newick,
    save_distance_matrix,
    save_feature_sequences,
    save_labels_csv,
    save_manifest,
    save_plan_json,
)
from .dtw import dtw_distance, sample
from .errors import ConfigurationError, FormatError, TrajseqError
from .features import ALL_CLASSES, ExtractionConfig, FeatureClass, extract
from .seqkernel import KernelConfig, SimilarityMatrix, plan_distance
from .model import MotionPlan


@dataclass
class RunConfig:
    """Resolved settings of one CLI invocation."""

    subcommand: str
    inputs: list[Path]
    extraction: ExtractionConfig
    kernel: KernelConfig
    metric: str
    samples: int
    cut_k: Optional[int]
    cut_height: Optional[float]
    out: Path
    seed: int
    truth: Optional[Path]


# ---------------------------------------------------------------------------
# input loading


def _doc_kind(path: Path) -> str:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "plans" in doc:
        return "manifest"
    return "plan"


def _load_plan_set(
    raw_inputs,
) -> tuple[list[MotionPlan], Optional[dict[str, str]], Optional[ManifestBundle]]:
    plans: list[MotionPlan] = []
    labels: dict[str, str] = {}
    bundle: Optional[ManifestBundle] = None

    def add_file(path: Path) -> None:
        nonlocal bundle
        if path.suffix == ".csv":
            plans.append(load_samples_csv(path))
        elif _doc_kind(path) == "manifest":
            bundle = load_manifest(path)
            plans.extend(bundle.plans)
            labels.update(bundle.labels or {})
        else:
            plans.append(load_plan_json(path))

    for raw in raw_inputs:
        path = Path(raw)
        if not path.exists():
            raise FormatError(f"{path}: no such file or directory")
        if path.is_dir():
            for f in sorted(path.glob("*.json")):
                add_file(f)
        else:
            add_file(path)
    if not plans:
        raise FormatError("no plans found in the given inputs")
    names = [p.name for p in plans]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise FormatError(f"duplicate plan names: {dupes}")
    return plans, labels or None, bundle


def _load_single_plan(raw: str) -> MotionPlan:
    path = Path(raw)
    if not path.exists():
        raise FormatError(f"{path}: no such file")
    if path.suffix == ".csv":
        return load_samples_csv(path)
    return load_plan_json(path)


# ---------------------------------------------------------------------------
# config resolution (CLI flags override manifest blocks, which override defaults)


def _parse_classes(spec: str) -> frozenset:
    try:
        return frozenset(FeatureClass(c.strip()) for c in spec.split(",") if c.strip())
    except ValueError as exc:
        raise ConfigurationError(
            f"unknown feature class in {spec!r}; valid: {','.join(c.value for c in FeatureClass)}"
        ) from exc


def _resolve_extraction(args, bundle: Optional[ManifestBundle]) -> ExtractionConfig:
    base = bundle.extraction if bundle is not None else ExtractionConfig()
    return ExtractionConfig(
        enabled_classes=base.enabled_classes
        if getattr(args, "classes", None) is None
        else _parse_classes(args.classes),
        prominence_threshold=base.prominence_threshold
        if getattr(args, "prominence_threshold", None) is None
        else args.prominence_threshold,
        constraint_epsilon_rel=base.constraint_epsilon_rel
        if getattr(args, "epsilon_rel", None) is None
        else args.epsilon_rel,
    )


def _resolve_kernel(args, bundle: Optional[ManifestBundle]) -> KernelConfig:
    base = bundle.kernel if bundle is not None else KernelConfig()
    return KernelConfig(
        similarity=base.similarity
        if getattr(args, "soft_sim", None) is None
        else SimilarityMatrix.for_feature_classes(args.soft_sim),
        use_gap_weighting=False if getattr(args, "no_gap_weighting", False) else base.use_gap_weighting,
        use_salience_weighting=False
        if getattr(args, "no_salience_weighting", False)
        else base.use_salience_weighting,
        max_subseq_len=base.max_subseq_len
        if getattr(args, "max_subseq_len", None) is None
        else args.max_subseq_len,
    )


def _resolve_run(args, bundle: Optional[ManifestBundle]) -> RunConfig:
    metric = getattr(args, "metric", "feature")
    samples = getattr(args, "samples", None)
    if samples is not None and metric != "dtw":
        raise ConfigurationError("--samples applies only with --metric dtw")
    return RunConfig(
        subcommand=args.subcommand,
        inputs=[Path(p) for p in getattr(args, "inputs", [])],
        extraction=_resolve_extraction(args, bundle),
        kernel=_resolve_kernel(args, bundle),
        metric=metric,
        samples=150 if samples is None else samples,
        cut_k=getattr(args, "cut_k", None),
        cut_height=getattr(args, "cut_height", None),
        out=Path(getattr(args, "out", ".")),
        seed=getattr(args, "seed", 0),
        truth=Path(args.truth) if getattr(args, "truth", None) else None,
    )


def _distance_matrix(plans, cfg: RunConfig):
    names = [p.name for p in plans]
    if cfg.metric == "feature":
        seqs = [extract(p, cfg.extraction) for p in plans]
        return pairwise_matrix(
            seqs, lambda a, b: plan_distance(a, b, cfg.kernel), ids=names
        )
    series = [sample(p, cfg.samples) for p in plans]
    return pairwise_matrix(series, dtw_distance, ids=names)


def _truth_labels(cfg: RunConfig, manifest_labels, names) -> Optional[ClusterLabels]:
    mapping = None
    if cfg.truth is not None:
        mapping = load_labels_csv(cfg.truth)
    elif manifest_labels:
        mapping = manifest_labels
    if mapping is None:
        return None
    missing = [n for n in names if n not in mapping]
    if missing:
        raise FormatError(f"ground truth misses plans: {missing}")
    return cluster_labels_from_names({n: mapping[n] for n in names})


def _print_confusion(matrix: np.ndarray, accuracy: float) -> None:
    print("confusion matrix (rows: ground truth, columns: predicted):")
    header = "      " + "".join(f"{f'C{j}':>6}" for j in range(matrix.shape[1]))
    print(header)
    for i, row in enumerate(matrix):
        print(f"  T{i:<3}" + "".join(f"{int(v):>6}" for v in row))
    print(f"accuracy: {accuracy:.4f}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(args) -> int:
    plans, _, bundle = _load_plan_set(args.inputs)
    cfg = _resolve_run(args, bundle)
    cfg.out.mkdir(parents=True, exist_ok=True)
    header_done = False
    for plan in plans:
        seqs = extract(plan, cfg.extraction)
        save_feature_sequences(seqs, cfg.out / f"{plan.name}.features.json", plan_name=plan.name)
        if not header_done:
            print("plan" + "".join(f"{s.dimension_id:>8}" for s in seqs) + f"{'total':>8}")
            header_done = True
        counts = [len(s) for s in seqs]
        print(plan.name + "".join(f"{c:>8}" for c in counts) + f"{sum(counts):>8}")
    print(f"wrote {len(plans)} feature-sequence files to {cfg.out}")
    return 0


def cmd_distance(args) -> int:
    plan_a = _load_single_plan(args.plan_a)
    plan_b = _load_single_plan(args.plan_b)
    cfg = _resolve_run(args, None)
    if cfg.metric == "feature":
        value = plan_distance(
            extract(plan_a, cfg.extraction), extract(plan_b, cfg.extraction), cfg.kernel
        )
    else:
        value = dtw_distance(sample(plan_a, cfg.samples), sample(plan_b, cfg.samples))
    print(repr(value))
    return 0


def cmd_matrix(args) -> int:
    plans, _, bundle = _load_plan_set(args.inputs)
    cfg = _resolve_run(args, bundle)
    dmat = _distance_matrix(plans, cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out / "distances.csv"
    save_distance_matrix(dmat, out_path)
    print(f"wrote {dmat.size}x{dmat.size} distance matrix to {out_path}")
    return 0


def cmd_cluster(args) -> int:
    plans, manifest_labels, bundle = _load_plan_set(args.inputs)
    cfg = _resolve_run(args, bundle)
    if (cfg.cut_k is None) == (cfg.cut_height is None):
        raise ConfigurationError("specify exactly one of --cut-k / --cut-height")
    names = [p.name for p in plans]

    dmat = _distance_matrix(plans, cfg)
    dend = single_linkage(dmat)
    labels = cut(dend, num_clusters=cfg.cut_k, height=cfg.cut_height)

    cfg.out.mkdir(parents=True, exist_ok=True)
    save_distance_matrix(dmat, cfg.out / "distances.csv")
    save_dendrogram_newick(dend, cfg.out / "dendrogram.nwk")
    save_dendrogram_json(dend, cfg.out / "dendrogram.json")
    save_labels_csv(
        {n: labels.assignment[n] for n in names}, cfg.out / "labels.csv", value_column="cluster"
    )
    print(f"{labels.n_clusters} clusters over {len(names)} plans (metric: {cfg.metric})")
    print(f"outputs in {cfg.out}: distances.csv labels.csv dendrogram.nwk dendrogram.json")

    truth = _truth_labels(cfg, manifest_labels, names)
    if truth is not None:
        matrix, accuracy = confusion(labels, truth)
        _print_confusion(matrix, accuracy)
        with (cfg.out / "confusion.csv").open("w") as fh:
            fh.write("\n".join(",".join(str(v) for v in row) for row in matrix) + "\n")
        fh_path = cfg.out / "confusion.csv"
        print(f"confusion matrix written to {fh_path}")
    return 0


def cmd_evaluate(args) -> int:
    predicted = cluster_labels_from_names(load_labels_csv(args.labels))
    truth = cluster_labels_from_names(load_labels_csv(args.truth))
    matrix, accuracy = confusion(predicted, truth)
    _print_confusion(matrix, accuracy)
    return 0


def cmd_generate(args) -> int:
    spec = SyntheticFamilySpec(
        family=args.family,
        levels=tuple(int(x) for x in args.levels.split(",") if x.strip()),
        plans_per_cluster=args.per_cluster,
        amplitude_jitter=args.amplitude_jitter,
        phase_jitter=args.phase_jitter,
        time_warp_jitter=args.time_warp_jitter,
        seed=args.seed,
    )
    plans, labels = generate_synthetic(spec)
    out = Path(args.out)
    plan_dir = out / "plans"
    plan_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for plan in plans:
        rel = f"plans/{plan.name}.json"
        save_plan_json(plan, out / rel)
        entries.append((rel, labels[plan.name]))
    save_labels_csv(labels, out / "truth.csv")
    save_manifest(entries, out / "manifest.json")
    print(f"generated {len(plans)} plans in {len(spec.levels)} clusters under {out}")
    return 0


def cmd_bench(args) -> int:
    plans, _, bundle = _load_plan_set(args.inputs)
    cfg = _resolve_run(args, bundle)
    rows = benchmod.run_benchmark(
        plans, cfg.extraction, cfg.kernel, reps=args.reps
    )
    print(benchmod.format_table(rows))
    cfg.out.mkdir(parents=True, exist_ok=True)
    csv_path = cfg.out / "bench.csv"
    benchmod.rows_to_csv(rows, csv_path)
    print(f"wrote {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    extraction = argparse.ArgumentParser(add_help=False)
    extraction.add_argument(
        "--prominence-threshold", type=float, default=None, metavar="S",
        help="discard extrema/constraint features below this salience (default 0.02)",
    )
    extraction.add_argument(
        "--epsilon-rel", type=float, default=None, metavar="E",
        help="active-constraint tolerance relative to the bound span (default 0.01)",
    )
    extraction.add_argument(
        "--classes", default=None, metavar="LIST",
        help="comma-separated feature classes (max,min,root,ub,lb); default all",
    )

    kernelp = argparse.ArgumentParser(add_help=False)
    kernelp.add_argument(
        "--soft-sim", type=float, default=None, metavar="S",
        help="similarity between max/ub and min/lb classes (default 0.5)",
    )
    kernelp.add_argument("--no-gap-weighting", action="store_true",
                         help="disable temporal gap weighting")
    kernelp.add_argument("--no-salience-weighting", action="store_true",
                         help="disable salience weighting")
    kernelp.add_argument("--max-subseq-len", type=int, default=None, metavar="P",
                         help="ignore matched chains longer than P (default unlimited)")

    metricp = argparse.ArgumentParser(add_help=False)
    metricp.add_argument("--metric", choices=("feature", "dtw"), default="feature")
    metricp.add_argument("--samples", type=int, default=None, metavar="K",
                         help="sample count for the DTW metric (default 150)")

    outp = argparse.ArgumentParser(add_help=False)
    outp.add_argument("--out", default=".", metavar="DIR", help="output directory")

    parser = argparse.ArgumentParser(
        prog="trajseq",
        description="Compress motion plans to feature sequences, measure distances, cluster.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("extract", parents=[extraction, outp],
                       help="write per-plan feature-sequence files")
    p.add_argument("inputs", nargs="+", help="plan files, directories, or a manifest")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("distance", parents=[extraction, kernelp, metricp],
                       help="distance between two plans")
    p.add_argument("plan_a")
    p.add_argument("plan_b")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("matrix", parents=[extraction, kernelp, metricp, outp],
                       help="pairwise distance matrix")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("cluster", parents=[extraction, kernelp, metricp, outp],
                       help="cluster plans and report against optional ground truth")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--cut-k", type=int, default=None, metavar="K",
                   help="cut the dendrogram into K clusters")
    p.add_argument("--cut-height", type=float, default=None, metavar="H",
                   help="cut the dendrogram at height H")
    p.add_argument("--truth", default=None, metavar="FILE",
                   help="name,label CSV with ground-truth clusters")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", help="confusion matrix between two label files")
    p.add_argument("--labels", required=True, metavar="FILE")
    p.add_argument("--truth", required=True, metavar="FILE")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", parents=[outp],
                       help="generate a labelled synthetic plan set")
    p.add_argument("--family", choices=("half_swings", "saturation_arcs"),
                   default="half_swings")
    p.add_argument("--levels", default="1,2", metavar="LIST",
                   help="comma-separated cluster levels (default 1,2)")
    p.add_argument("--per-cluster", type=int, default=10, metavar="N")
    p.add_argument("--amplitude-jitter", type=float, default=0.1)
    p.add_argument("--phase-jitter", type=float, default=0.1)
    p.add_argument("--time-warp-jitter", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", parents=[extraction, kernelp, outp],
                       help="timing report: extraction, kernel distance, DTW scaling")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--reps", type=int, default=benchmod.DEFAULT_REPS,
                   help="repetitions per timing (median reported)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except TrajseqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
