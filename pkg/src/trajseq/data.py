"""File formats, dataset loading, synthetic generation, result serialization.

Formats
-------
Plan JSON::

    { "name": str, "t_f": float,
      "state":   [ {"bounds": [l, u] | null, "degree": 1|3,
                    "breakpoints": [...], "coeffs": [[c0..cd], ...]} ],
      "control": [ ... ] }

Samples CSV: header ``t,<dim names...>``, decimal point, comma separator.
Feature-sequence JSON: per dimension a list of
``{"class": "max|min|root|ub|lb", "time": x, "salience": v}``.
Distance-matrix CSV: first row/column carry item names, body symmetric.
Dendrogram: Newick (child annotated with its parent's merge height) and a
JSON merge list ``[[a, b, h], ...]``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .cluster import ClusterLabels, Dendrogram, DistanceMatrix
from .errors import ConfigurationError, DataError, FormatError
from .features import (
    ALL_CLASSES,
    ExtractionConfig,
    FeatureClass,
    FeatureElement,
    FeatureSequence,
)
from .seqkernel import KernelConfig, SimilarityMatrix
from .model import DimensionBounds, MotionPlan, PiecewisePolynomial, from_samples

# ---------------------------------------------------------------------------
# plan JSON


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


def _dimension_from_dict(entry, where: str) -> tuple[PiecewisePolynomial, Optional[DimensionBounds]]:
    if not isinstance(entry, Mapping):
        raise FormatError(f"{where}: expected an object")
    raw_bounds = _require(entry, "bounds", where)
    bounds = None if raw_bounds is None else DimensionBounds(*_pair(raw_bounds, f"{where}.bounds"))
    degree = _require(entry, "degree", where)
    breakpoints = _require(entry, "breakpoints", where)
    coeffs = _require(entry, "coeffs", where)
    try:
        pp = PiecewisePolynomial(np.asarray(breakpoints, dtype=float), np.asarray(coeffs, dtype=float))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise DataError(f"{where}: {exc}") from exc
        raise FormatError(f"{where}: {exc}") from exc
    if pp.degree != degree:
        raise FormatError(f"{where}: declared degree {degree} but coefficients imply {pp.degree}")
    return pp, bounds


def _pair(value, where: str) -> tuple[float, float]:
    try:
        lo, hi = value
        return float(lo), float(hi)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: expected a [lower, upper] pair") from exc


def plan_from_dict(doc: Mapping, where: str = "plan") -> MotionPlan:
    if not isinstance(doc, Mapping):
        raise FormatError(f"{where}: expected a JSON object")
    name = _require(doc, "name", where)
    t_f = _require(doc, "t_f", where)
    state = _require(doc, "state", where)
    control = doc.get("control", [])
    state_dims = tuple(
        _dimension_from_dict(e, f"{where}.state[{i}]") for i, e in enumerate(state)
    )
    control_dims = tuple(
        _dimension_from_dict(e, f"{where}.control[{i}]") for i, e in enumerate(control)
    )
    try:
        return MotionPlan(str(name), float(t_f), state_dims, control_dims)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def plan_to_dict(plan: MotionPlan) -> dict:
    def dim(pp: PiecewisePolynomial, bounds: Optional[DimensionBounds]) -> dict:
        return {
            "bounds": None if bounds is None else [bounds.lower, bounds.upper],
            "degree": pp.degree,
            "breakpoints": pp.breakpoints.tolist(),
            "coeffs": pp.coefficients.tolist(),
        }

    return {
        "name": plan.name,
        "t_f": plan.t_f,
        "state": [dim(pp, b) for pp, b in plan.state_dims],
        "control": [dim(pp, b) for pp, b in plan.control_dims],
    }


def load_plan_json(path) -> MotionPlan:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return plan_from_dict(doc, where=str(path))


def save_plan_json(plan: MotionPlan, path) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n")


# ---------------------------------------------------------------------------
# samples CSV

# Inferred bounds are widened by this fraction of the value range so samples
# sitting exactly on the min/max do not register as active constraints.
BOUNDS_WIDENING = 0.01


def load_samples_csv(
    path,
    bounds: Optional[Sequence[Optional[DimensionBounds]]] = None,
    t_f: Optional[float] = None,
) -> MotionPlan:
    """Motion plan from a ``t,dim_1..dim_D`` sample table (linear splines).

    All columns become state dimensions (sensor data carries no control
    signal).  Bounds may be supplied per column; otherwise they are
    inferred from the column range widened by 1 %.  If ``t_f`` is given the
    times (which must start at 0) are rescaled to end there.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if len(header) < 2 or header[0].strip() != "t":
            raise FormatError(f"{path}: header must be 't,<dim names...>', got {header!r}")
        names = [h.strip() for h in header[1:]]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric cell in {row!r}") from None
    if len(rows) < 2:
        raise FormatError(f"{path}: need at least 2 sample rows")
    table = np.asarray(rows, dtype=float)
    times = table[:, 0]
    if np.any(np.diff(times) <= 0):
        raise FormatError(f"{path}: time column must be strictly increasing")
    if abs(times[0]) > 1e-9:
        raise FormatError(f"{path}: time column must start at 0, got {times[0]!r}")
    if t_f is not None:
        times = times * (t_f / times[-1])

    if bounds is not None and len(bounds) != len(names):
        raise FormatError(f"{path}: got {len(bounds)} bounds for {len(names)} dimensions")
    dims = []
    for d in range(len(names)):
        values = table[:, d + 1]
        if bounds is not None:
            b = bounds[d]
        else:
            lo, hi = float(values.min()), float(values.max())
            pad = BOUNDS_WIDENING * max(hi - lo, 1e-12)
            b = DimensionBounds(lo - pad, hi + pad)
        dims.append((from_samples(times, values), b))
    return MotionPlan(path.stem, float(times[-1]), tuple(dims))


# ---------------------------------------------------------------------------
# feature sequences


def sequences_to_dict(seqs: Sequence[FeatureSequence], plan_name: Optional[str] = None) -> dict:
    doc: dict = {}
    if plan_name is not None:
        doc["plan"] = plan_name
    doc["dimensions"] = [
        {
            "id": s.dimension_id,
            "elements": [
                {"class": e.label, "time": e.time, "salience": e.salience}
                for e in s.elements
            ],
        }
        for s in seqs
    ]
    return doc


def sequences_from_dict(doc: Mapping, where: str = "features") -> tuple[Optional[str], list[FeatureSequence]]:
    dims = _require(doc, "dimensions", where)
    seqs = []
    for i, entry in enumerate(dims):
        here = f"{where}.dimensions[{i}]"
        dim_id = _require(entry, "id", here)
        elements = []
        for j, el in enumerate(_require(entry, "elements", here)):
            spot = f"{here}.elements[{j}]"
            try:
                elements.append(
                    FeatureElement(
                        FeatureClass(_require(el, "class", spot)),
                        float(_require(el, "time", spot)),
                        float(_require(el, "salience", spot)),
                    )
                )
            except ValueError as exc:
                raise FormatError(f"{spot}: {exc}") from exc
        seqs.append(FeatureSequence(str(dim_id), tuple(elements)))
    return doc.get("plan"), seqs


def save_feature_sequences(seqs: Sequence[FeatureSequence], path, plan_name: Optional[str] = None) -> None:
    Path(path).write_text(json.dumps(sequences_to_dict(seqs, plan_name), indent=2) + "\n")


def load_feature_sequences(path) -> tuple[Optional[str], list[FeatureSequence]]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return sequences_from_dict(doc, where=str(path))


# ---------------------------------------------------------------------------
# distance matrix CSV


def save_distance_matrix(dmat: DistanceMatrix, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["", *dmat.item_ids])
        for name, row in zip(dmat.item_ids, dmat.entries):
            writer.writerow([name, *[repr(v) for v in row]])


def load_distance_matrix(path) -> DistanceMatrix:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    ids = [c.strip() for c in rows[0][1:]]
    if len(rows) - 1 != len(ids):
        raise FormatError(f"{path}: expected {len(ids)} data rows, got {len(rows) - 1}")
    entries = np.zeros((len(ids), len(ids)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(ids) + 1:
            raise FormatError(f"{path}:{i}: expected {len(ids) + 1} cells, got {len(row)}")
        if row[0].strip() != ids[i - 2]:
            raise FormatError(f"{path}:{i}: row name {row[0]!r} does not match header order")
        try:
            entries[i - 2] = [float(c) for c in row[1:]]
        except ValueError:
            raise FormatError(f"{path}:{i}: non-numeric cell") from None
    return DistanceMatrix(tuple(ids), entries)


# ---------------------------------------------------------------------------
# dendrograms


def _fmt_height(h: float) -> str:
    return f"{h:.12g}"


def to_newick(dend: Dendrogram) -> str:
    """Newick string; each child is annotated with its parent merge height."""
    n = dend.n_leaves
    if n == 1:
        return f"{dend.leaf_ids[0]};"
    children = {n + k: (a, b) for k, (a, b, _) in enumerate(dend.merges)}

    def min_item(node: int) -> int:
        if node < n:
            return node
        a, b = children[node]
        return min(min_item(a), min_item(b))

    def render(node: int, parent_height: Optional[float]) -> str:
        if node < n:
            body = dend.leaf_ids[node]
        else:
            a, b = sorted(children[node], key=min_item)
            h = dend.merges[node - n][2]
            body = f"({render(a, h)},{render(b, h)})"
        return body if parent_height is None else f"{body}:{_fmt_height(parent_height)}"

    return render(n + len(dend.merges) - 1, None) + ";"


def save_dendrogram_newick(dend: Dendrogram, path) -> None:
    Path(path).write_text(to_newick(dend) + "\n")


def save_dendrogram_json(dend: Dendrogram, path) -> None:
    doc = {"leaves": list(dend.leaf_ids), "merges": [[a, b, h] for a, b, h in dend.merges]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_dendrogram_json(path) -> Dendrogram:
    path = Path(path)
    doc = json.loads(path.read_text())
    return Dendrogram(tuple(_require(doc, "leaves", str(path))),
                      tuple((int(a), int(b), float(h)) for a, b, h in _require(doc, "merges", str(path))))


# ---------------------------------------------------------------------------
# label tables


def save_labels_csv(mapping: Mapping[str, object], path, value_column: str = "label") -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", value_column])
        for name in mapping:
            writer.writerow([name, mapping[name]])


def load_labels_csv(path) -> dict[str, str]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 2:
        raise FormatError(f"{path}: expected a two-column 'name,label' table")
    out = {}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise FormatError(f"{path}:{i}: expected 2 cells, got {len(row)}")
        if row[0] in out:
            raise FormatError(f"{path}:{i}: duplicate name {row[0]!r}")
        out[row[0]] = row[1]
    return out


def cluster_labels_from_names(mapping: Mapping[str, str]) -> ClusterLabels:
    """Map arbitrary string labels onto contiguous cluster indices."""
    order = {label: i for i, label in enumerate(sorted(set(mapping.values())))}
    return ClusterLabels({name: order[label] for name, label in mapping.items()})


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class ManifestBundle:
    """A loaded plan-set manifest: plans, optional truth, config blocks."""

    plans: tuple[MotionPlan, ...]
    labels: Optional[dict[str, str]]
    extraction: ExtractionConfig
    kernel: KernelConfig


def _extraction_from_dict(doc: Mapping) -> ExtractionConfig:
    classes = doc.get("classes")
    return ExtractionConfig(
        enabled_classes=ALL_CLASSES if classes is None else frozenset(FeatureClass(c) for c in classes),
        prominence_threshold=float(doc.get("prominence_threshold", 0.02)),
        constraint_epsilon_rel=float(doc.get("epsilon_rel", 0.01)),
    )


def _kernel_from_dict(doc: Mapping) -> KernelConfig:
    max_len = doc.get("max_subseq_len")
    return KernelConfig(
        similarity=SimilarityMatrix.for_feature_classes(float(doc.get("soft_similarity", 0.5))),
        use_gap_weighting=bool(doc.get("gap_weighting", True)),
        use_salience_weighting=bool(doc.get("salience_weighting", True)),
        max_subseq_len=None if max_len is None else int(max_len),
    )


def load_manifest(path) -> ManifestBundle:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    entries = _require(doc, "plans", str(path))
    plans, labels = [], {}
    labelled = 0
    for i, entry in enumerate(entries):
        where = f"{path}.plans[{i}]"
        plan_path = path.parent / _require(entry, "path", where)
        plan = load_plan_json(plan_path)
        plans.append(plan)
        if "label" in entry:
            labels[plan.name] = str(entry["label"])
            labelled += 1
    names = [p.name for p in plans]
    if len(set(names)) != len(names):
        raise FormatError(f"{path}: plan names must be unique")
    if labelled not in (0, len(plans)):
        raise FormatError(f"{path}: labels must cover all plans or none ({labelled}/{len(plans)})")
    return ManifestBundle(
        plans=tuple(plans),
        labels=labels if labelled else None,
        extraction=_extraction_from_dict(doc.get("extraction", {})),
        kernel=_kernel_from_dict(doc.get("kernel", {})),
    )


def save_manifest(
    entries: Sequence[tuple[str, Optional[str]]],
    path,
    extraction: Optional[Mapping] = None,
    kernel: Optional[Mapping] = None,
) -> None:
    """Write a manifest; ``entries`` are (relative plan path, label-or-None)."""
    doc: dict = {
        "plans": [
            {"path": rel} if label is None else {"path": rel, "label": label}
            for rel, label in entries
        ]
    }
    if extraction:
        doc["extraction"] = dict(extraction)
    if kernel:
        doc["kernel"] = dict(kernel)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# synthetic ground-truth generation

_N_KNOTS = 25
_STATE_BOUNDS = (-1.5, 1.5)
_CONTROL_BOUNDS = (-1.0, 1.0)

FAMILIES = ("half_swings", "saturation_arcs")


@dataclass(frozen=True)
class SyntheticFamilySpec:
    """Recipe for a labelled synthetic plan set.

    ``half_swings`` plans carry a damped sinusoid state whose number of
    interior sign changes equals the level; ``saturation_arcs`` plans carry
    a clipped sinusoid control with ``level`` saturated arcs.  Jitters
    perturb amplitude, phase and knot spacing without changing the
    label-defining count.
    """

    family: str = "half_swings"
    levels: tuple[int, ...] = (1, 2)
    plans_per_cluster: int = 10
    amplitude_jitter: float = 0.1
    phase_jitter: float = 0.1
    time_warp_jitter: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(int(l) for l in self.levels))
        if self.family not in FAMILIES:
            raise ConfigurationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not self.levels or any(l < 1 for l in self.levels):
            raise ConfigurationError("levels must be a non-empty list of integers >= 1")
        if self.plans_per_cluster < 1:
            raise ConfigurationError("plans_per_cluster must be >= 1")
        for jitter in (self.amplitude_jitter, self.phase_jitter, self.time_warp_jitter):
            if not 0.0 <= jitter < 0.5:
                raise ConfigurationError(f"jitters must lie in [0, 0.5), got {jitter}")


def _hermite(knots: np.ndarray, values: np.ndarray, slopes: np.ndarray) -> PiecewisePolynomial:
    dt = np.diff(knots)
    dv = np.diff(values)
    m0, m1 = slopes[:-1], slopes[1:]
    c0 = values[:-1]
    c1 = m0
    c2 = (3.0 * dv / dt - 2.0 * m0 - m1) / dt
    c3 = (m0 + m1 - 2.0 * dv / dt) / dt**2
    return PiecewisePolynomial(knots, np.column_stack([c0, c1, c2, c3]))


def _jittered_knots(rng: np.random.Generator, warp: float) -> np.ndarray:
    incr = 1.0 + warp * rng.uniform(-1.0, 1.0, _N_KNOTS - 1)
    tau = np.concatenate([[0.0], np.cumsum(incr)])
    return tau / tau[-1]


def _generate_plan(rng: np.random.Generator, spec: SyntheticFamilySpec, level: int, name: str) -> MotionPlan:
    u_amp = rng.uniform(-1.0, 1.0)
    u_phase = rng.uniform(-1.0, 1.0)
    u_phase2 = rng.uniform(-1.0, 1.0)
    u_tf = rng.uniform(-1.0, 1.0)
    tau = _jittered_knots(rng, spec.time_warp_jitter)

    t_f = 2.0 * (1.0 + 0.25 * spec.time_warp_jitter * u_tf)
    knots = tau * t_f
    omega = level * math.pi
    amp = 0.8 * (1.0 + spec.amplitude_jitter * u_amp)
    state_bounds = DimensionBounds(*_STATE_BOUNDS)
    control_bounds = DimensionBounds(*_CONTROL_BOUNDS)

    if spec.family == "half_swings":
        # phase in (pi/4, 3pi/4) keeps exactly `level` interior sign changes
        phase = (math.pi / 2.0) * (1.0 + spec.phase_jitter * u_phase)
        decay = 0.3
        env = amp * np.exp(-decay * tau)
        s0 = env * np.sin(phase + omega * tau)
        s0_slope = env * (omega * np.cos(phase + omega * tau) - decay * np.sin(phase + omega * tau))
        env2 = 0.55 * amp * np.exp(-0.2 * tau)
        s1 = env2 * np.cos(phase + omega * tau)
        s1_slope = env2 * (-omega * np.sin(phase + omega * tau) - 0.2 * np.cos(phase + omega * tau))
        phase_u = (math.pi / 3.0) * (1.0 + spec.phase_jitter * u_phase2)
        ctrl = np.clip(1.5 * np.sin(phase_u + omega * tau), -1.0, 1.0)
    else:  # saturation_arcs
        # phase < pi/2 puts exactly `level` sine peaks (hence arcs) inside
        phase = (math.pi / 4.0) * (1.0 + spec.phase_jitter * u_phase)
        env = 0.3 * (1.0 + spec.amplitude_jitter * u_amp) * np.exp(-0.4 * tau)
        s0 = 0.5 + env * np.cos(phase + omega * tau)
        s0_slope = env * (-omega * np.sin(phase + omega * tau) - 0.4 * np.cos(phase + omega * tau))
        s1 = 0.2 + 0.25 * env * np.sin(phase + omega * tau)
        s1_slope = 0.25 * env * (omega * np.cos(phase + omega * tau) - 0.4 * np.sin(phase + omega * tau))
        phase_u = (math.pi / 4.0) * (1.0 + spec.phase_jitter * u_phase2)
        ctrl = np.clip(1.3 * np.sin(phase_u + omega * tau), -1.0, 1.0)

    state_dims = (
        (_hermite(knots, s0, s0_slope / t_f), state_bounds),
        (_hermite(knots, s1, s1_slope / t_f), state_bounds),
    )
    control_dims = ((from_samples(knots, ctrl), control_bounds),)
    return MotionPlan(name, t_f, state_dims, control_dims)


def generate_synthetic(spec: SyntheticFamilySpec) -> tuple[list[MotionPlan], dict[str, str]]:
    """Deterministic labelled plan set; the label is the family level."""
    rng = np.random.default_rng(spec.seed)
    prefix = "hs" if spec.family == "half_swings" else "sat"
    plans, labels = [], {}
    for level in spec.levels:
        for i in range(spec.plans_per_cluster):
            name = f"{prefix}{level}_{i:03d}"
            plans.append(_generate_plan(rng, spec, level, name))
            labels[name] = f"{prefix}{level}"
    return plans, labels
