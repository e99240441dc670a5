"""Orbit sweeps over a dataset against a model: the NERO data structures.

The engine transforms inputs on the fly, batches them through the model
(concurrently, bounded by the configured in-flight limit), and assembles
per-sample metric vectors plus the dataset-level aggregate and DR layout.
Results are keyed by (sample id, orbit index), so completion order never
affects the outcome. Per-element inference failures become NaN entries with
an error note; a record fails as a whole only if every element failed.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from .actions import (
    ActionContext,
    BBox,
    ClassLabel,
    FlowField,
    GroundTruth,
    ImagePairSample,
    ImageSample,
    InputSample,
    ModelOutput,
    PointCloudSample,
    act_input,
    act_output,
    output_element,
)
from .consensus import ConsensusError, consensus_metric
from .groups import Orbit, OrbitSpec, enumerate_orbit
from .metrics import MetricValue, evaluate, metric_polarity
from .modelproto import ModelProtocolError, make_wire_id
from .projection import DRLayout, pca_project

# modality -> (group kind, allowed metrics, input type, truth type)
COMPAT = {
    "image-classification": ("rotation2d", ("confidence", "correct"), ImageSample, ClassLabel),
    "image-detection": ("translation2d", ("detection_iou",), ImageSample, BBox),
    "image-pair-flow": ("square_sym", ("rmse",), ImagePairSample, FlowField),
    "pointcloud-classification": (
        "axis_angle3d",
        ("confidence", "correct"),
        PointCloudSample,
        ClassLabel,
    ),
}

TRUTH_MODES = ("ground_truth", "consensus")


class EngineError(RuntimeError):
    """Run-level failure: incompatible configuration or a fully failed record."""


@dataclass(frozen=True)
class EvalSample:
    """One dataset entry ready for evaluation."""

    x: InputSample
    y: GroundTruth
    ctx: Optional[ActionContext] = None
    class_label: Optional[int] = None

    @property
    def sample_id(self) -> str:
        return self.x.sample_id


@dataclass(frozen=True, eq=False)
class NeroRecord:
    """Per-sample metric vector over the orbit, with population stats."""

    sample_id: str
    values: tuple[MetricValue, ...]
    mean: float
    variance: float
    nan_count: int
    class_label: Optional[int] = None
    truth: Optional[GroundTruth] = None
    outputs: tuple[Optional[ModelOutput], ...] = ()
    errors: dict[int, str] = field(default_factory=dict)
    input_digest: str = ""

    @classmethod
    def from_values(
        cls,
        sample_id: str,
        values: Sequence[MetricValue],
        class_label: Optional[int] = None,
        truth: Optional[GroundTruth] = None,
        outputs: Sequence[Optional[ModelOutput]] = (),
        errors: Optional[dict[int, str]] = None,
        input_digest: str = "",
    ) -> "NeroRecord":
        scalars = np.array([v.value for v in values], dtype=np.float64)
        finite = scalars[~np.isnan(scalars)]
        if finite.size == 0:
            raise EngineError(f"all {scalars.size} orbit elements failed for {sample_id!r}")
        return cls(
            sample_id=sample_id,
            values=tuple(values),
            mean=float(finite.mean()),
            variance=float(finite.var()),
            nan_count=int(scalars.size - finite.size),
            class_label=class_label,
            truth=truth,
            outputs=tuple(outputs),
            errors=dict(errors or {}),
            input_digest=input_digest,
        )

    def scalars(self) -> np.ndarray:
        return np.array([v.value for v in self.values], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class NeroResult:
    """Everything one run produced, ready for persistence and serving."""

    run_id: str
    created_at: str
    orbit_spec: OrbitSpec
    orbit: Orbit
    metric_name: str
    metric_higher_is_better: bool
    truth_mode: str
    model: object  # ModelDescriptor
    records: tuple[NeroRecord, ...]
    aggregate: np.ndarray
    aggregate_coverage: np.ndarray
    aggregate_maps: Optional[np.ndarray]
    dr: DRLayout
    notes: dict = field(default_factory=dict)


def aggregate_nero(records: Sequence[NeroRecord]) -> np.ndarray:
    """Positionwise NaN-excluding mean of the record vectors."""
    if not records:
        raise EngineError("cannot aggregate zero records")
    lengths = {len(r.values) for r in records}
    if len(lengths) != 1:
        raise EngineError(f"records disagree on orbit size: {sorted(lengths)}")
    stack = np.stack([r.scalars() for r in records])
    mask = ~np.isnan(stack)
    counts = mask.sum(axis=0)
    sums = np.where(mask, stack, 0.0).sum(axis=0)
    return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def aggregate_coverage(records: Sequence[NeroRecord]) -> np.ndarray:
    stack = np.stack([r.scalars() for r in records])
    return (~np.isnan(stack)).sum(axis=0)


def subset_filter(
    records: Sequence[NeroRecord],
    class_label: Optional[int] = None,
    ids: Optional[Sequence[str]] = None,
) -> list[NeroRecord]:
    """Stable-order filtering by class label and/or an explicit id set."""
    wanted = set(ids) if ids is not None else None
    out = []
    for r in records:
        if class_label is not None and r.class_label != class_label:
            continue
        if wanted is not None and r.sample_id not in wanted:
            continue
        out.append(r)
    return out


# --- evaluation helpers ---


def _digest_input(x: InputSample) -> bytes:
    h = hashlib.sha256()
    if isinstance(x, ImageSample):
        h.update(x.pixels.tobytes())
    elif isinstance(x, ImagePairSample):
        h.update(x.frame_a.tobytes())
        h.update(x.frame_b.tobytes())
    else:
        h.update(x.points.tobytes())
    return h.digest()


def _transform(sample: EvalSample, orbit: Orbit, k: int) -> InputSample:
    moved = act_input(orbit.elements[k], sample.x, sample.ctx)
    return dataclasses.replace(moved, sample_id=make_wire_id(sample.sample_id, k))


def _values_from_outputs(
    sample: EvalSample,
    orbit: Orbit,
    outputs: Sequence[Optional[ModelOutput]],
    metric_name: str,
    truth_mode: str,
) -> list[MetricValue]:
    if truth_mode == "consensus":
        pairs = list(zip(orbit.elements, outputs))
        try:
            return consensus_metric(pairs, metric_name, orbit.orbit_id)
        except ConsensusError as exc:
            raise EngineError(f"consensus undefined for {sample.sample_id!r}: {exc}") from exc
    values = []
    for g, out in zip(orbit.elements, outputs):
        if out is None:
            values.append(MetricValue(float("nan")))
            continue
        truth = act_output(output_element(g), sample.y)
        values.append(evaluate(metric_name, out, truth))
    return values


def check_compatibility(modality: str, orbit_kind: str, metric_name: str):
    if modality not in COMPAT:
        raise EngineError(f"unknown modality {modality!r}")
    group_kind, metrics, _, _ = COMPAT[modality]
    if orbit_kind != group_kind:
        raise EngineError(f"{modality} pairs with {group_kind} orbits, not {orbit_kind}")
    if metric_name not in metrics:
        raise EngineError(f"{modality} supports metrics {metrics}, not {metric_name!r}")


def individual_nero(
    x: InputSample,
    y: GroundTruth,
    orbit: Orbit,
    model,
    metric_name: str,
    truth_mode: str = "ground_truth",
    ctx: Optional[ActionContext] = None,
    class_label: Optional[int] = None,
    batch_size: int = 32,
) -> NeroRecord:
    """Evaluate one sample along the orbit (serial path; ``run`` parallelizes)."""
    sample = EvalSample(x=x, y=y, ctx=ctx, class_label=class_label)
    outputs, errors, digest = _sweep_serial(sample, orbit, model, batch_size)
    values = _values_from_outputs(sample, orbit, outputs, metric_name, truth_mode)
    return NeroRecord.from_values(
        sample.sample_id, values, class_label, y, outputs, errors, digest
    )


def _sweep_serial(sample: EvalSample, orbit: Orbit, model, batch_size: int):
    outputs: list[Optional[ModelOutput]] = [None] * len(orbit)
    errors: dict[int, str] = {}
    digests: list[bytes] = []
    for start in range(0, len(orbit), batch_size):
        ks = range(start, min(start + batch_size, len(orbit)))
        batch = [_transform(sample, orbit, k) for k in ks]
        digests.extend(_digest_input(b) for b in batch)
        try:
            outs = model.infer(batch)
        except ModelProtocolError as exc:
            for k in ks:
                errors[k] = str(exc)
            continue
        for k, out in zip(ks, outs):
            outputs[k] = out
    record_digest = hashlib.sha256(b"".join(digests)).hexdigest()
    return outputs, errors, record_digest


def run(
    config,
    samples: Sequence[EvalSample],
    model,
    dispatch_rng=None,
) -> NeroResult:
    """Evaluate every sample concurrently and assemble the NeroResult.

    ``dispatch_rng`` (a random.Random) shuffles task submission order; results
    are independent of it by construction, which the test suite exercises.
    """
    descriptor = model.describe()
    orbit = enumerate_orbit(config.orbit_spec)
    check_compatibility(descriptor.modality, orbit.kind, config.metric_name)
    if config.truth_mode not in TRUTH_MODES:
        raise EngineError(f"truth mode must be one of {TRUTH_MODES}")
    if not samples:
        raise EngineError("dataset selection is empty")

    _, _, input_type, truth_type = COMPAT[descriptor.modality]
    for s in samples:
        if not isinstance(s.x, input_type) or not isinstance(s.y, truth_type):
            raise EngineError(
                f"sample {s.sample_id!r} does not match modality {descriptor.modality}"
            )

    batch = max(1, min(config.batch_size, descriptor.max_batch))
    tasks = []
    for si, sample in enumerate(samples):
        for start in range(0, len(orbit), batch):
            tasks.append((si, start, min(start + batch, len(orbit))))
    if dispatch_rng is not None:
        dispatch_rng.shuffle(tasks)

    # keyed by (sample index, orbit index): single writer per key
    outputs: dict[tuple[int, int], Optional[ModelOutput]] = {}
    errors: dict[tuple[int, int], str] = {}
    digests: dict[tuple[int, int], bytes] = {}

    def work(task):
        si, start, stop = task
        sample = samples[si]
        ks = range(start, stop)
        moved = [_transform(sample, orbit, k) for k in ks]
        local_digests = {k: _digest_input(m) for k, m in zip(ks, moved)}
        try:
            outs = model.infer(moved)
            return si, {k: o for k, o in zip(ks, outs)}, {}, local_digests
        except ModelProtocolError as exc:
            return si, {k: None for k in ks}, {k: str(exc) for k in ks}, local_digests

    with concurrent.futures.ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        for si, outs, errs, digs in pool.map(work, tasks):
            for k, o in outs.items():
                outputs[(si, k)] = o
            for k, msg in errs.items():
                errors[(si, k)] = msg
            for k, d in digs.items():
                digests[(si, k)] = d

    records = []
    for si, sample in enumerate(samples):
        outs = [outputs[(si, k)] for k in range(len(orbit))]
        errs = {k: errors[(si, k)] for k in range(len(orbit)) if (si, k) in errors}
        digest = hashlib.sha256(
            b"".join(digests[(si, k)] for k in range(len(orbit)))
        ).hexdigest()
        values = _values_from_outputs(sample, orbit, outs, config.metric_name, config.truth_mode)
        records.append(
            NeroRecord.from_values(
                sample.sample_id, values, sample.class_label, sample.y, outs, errs, digest
            )
        )

    agg = aggregate_nero(records)
    coverage = aggregate_coverage(records)
    agg_maps = _aggregate_maps(records, orbit)
    matrix = np.stack([r.scalars() for r in records])
    dr = pca_project(matrix) if not np.isnan(matrix).all(axis=0).any() else _zero_dr(len(records))

    return NeroResult(
        run_id=config.run_id,
        created_at=datetime.now(timezone.utc).isoformat(),
        orbit_spec=config.orbit_spec,
        orbit=orbit,
        metric_name=config.metric_name,
        metric_higher_is_better=metric_polarity(config.metric_name),
        truth_mode=config.truth_mode,
        model=descriptor,
        records=tuple(records),
        aggregate=agg,
        aggregate_coverage=coverage,
        aggregate_maps=agg_maps,
        dr=dr,
        notes=dict(getattr(config, "notes", {}) or {}),
    )


def _zero_dr(count: int) -> DRLayout:
    return DRLayout(np.zeros((count, 2)), (0.0, 0.0))


def _aggregate_maps(records: Sequence[NeroRecord], orbit: Orbit) -> Optional[np.ndarray]:
    """Positionwise mean of per-location maps across samples, where present."""
    shapes = {
        v.per_location.shape for r in records for v in r.values if v.per_location is not None
    }
    if not shapes:
        return None
    if len(shapes) != 1:
        raise EngineError(f"per-location maps disagree on shape: {sorted(shapes)}")
    shape = shapes.pop()
    out = np.full((len(orbit),) + shape, np.nan)
    for k in range(len(orbit)):
        maps = [
            r.values[k].per_location for r in records if r.values[k].per_location is not None
        ]
        if maps:
            out[k] = np.mean(maps, axis=0)
    return out


def flatness(record: NeroRecord) -> float:
    """max - min over the record's finite values (0 for a perfectly flat record)."""
    finite = record.scalars()
    finite = finite[~np.isnan(finite)]
    if finite.size == 0:
        return math.nan
    return float(finite.max() - finite.min())
