"""Scalar (and per-location) gap metrics between model outputs and ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .actions import BBox, ClassLabel, ClassProbs, Detections, FlowField

METRIC_NAMES = ("confidence", "correct", "detection_iou", "rmse")

LOWER_IS_BETTER = {"rmse"}


@dataclass(frozen=True, eq=False)
class MetricValue:
    """One metric evaluation: a scalar, an optional per-location map, and polarity.

    For map-carrying metrics the map stores per-pixel error magnitudes and the
    scalar is their RMS: value = sqrt(mean(map**2)).
    """

    value: float
    per_location: Optional[np.ndarray] = None
    higher_is_better: bool = True


def confidence(p: ClassProbs, y: ClassLabel) -> MetricValue:
    """Probability assigned to the correct class."""
    if y.index >= p.probs.size:
        raise ValueError(f"label index {y.index} outside probs of size {p.probs.size}")
    return MetricValue(float(p.probs[y.index]))


def correct(p: ClassProbs, y: ClassLabel) -> MetricValue:
    """1.0 if the argmax class (ties to the lowest index) matches the label."""
    if y.index >= p.probs.size:
        raise ValueError(f"label index {y.index} outside probs of size {p.probs.size}")
    return MetricValue(1.0 if int(np.argmax(p.probs)) == y.index else 0.0)


def iou(a: BBox, b: BBox) -> MetricValue:
    """Intersection over union in continuous box coordinates."""
    ix = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    iy = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    inter = max(ix, 0.0) * max(iy, 0.0)
    union = a.area + b.area - inter
    return MetricValue(inter / union if union > 0 else 0.0)


def detection_iou(d: Detections, y: BBox) -> MetricValue:
    """IOU between the ground truth and the single most-confident detection.

    Confidence ties go to the first detection in sequence; no detections at
    all scores 0.0 (a missing detection is a maximal failure, and NaN would
    poison aggregates).
    """
    if not d.items:
        return MetricValue(0.0)
    best = max(d.items, key=lambda det: det.confidence)
    return iou(best.box, y)


def rmse(pred: FlowField, gt: FlowField) -> MetricValue:
    """Root mean squared vector error, with the per-pixel magnitude map attached."""
    if pred.vectors.shape != gt.vectors.shape:
        raise ValueError(f"shape mismatch: {pred.vectors.shape} vs {gt.vectors.shape}")
    diff = pred.vectors.astype(np.float64) - gt.vectors.astype(np.float64)
    per_pixel = np.sqrt((diff**2).sum(axis=2))
    scalar = float(np.sqrt((per_pixel**2).mean()))
    return MetricValue(scalar, per_location=per_pixel, higher_is_better=False)


TruthValue = Union[ClassLabel, ClassProbs, BBox, FlowField]
OutputValue = Union[ClassProbs, Detections, FlowField]


def evaluate(name: str, output: OutputValue, truth: TruthValue) -> MetricValue:
    """Evaluate a metric by its RunConfig name.

    Classification metrics accept ClassProbs as truth (the consensus case) by
    reducing it to its argmax label, ties to the lowest index.
    """
    if name not in METRIC_NAMES:
        raise ValueError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")
    if name in ("confidence", "correct"):
        if isinstance(truth, ClassProbs):
            truth = ClassLabel(int(np.argmax(truth.probs)), truth.probs.size)
        fn = confidence if name == "confidence" else correct
        return fn(output, truth)
    if name == "detection_iou":
        return detection_iou(output, truth)
    return rmse(output, truth)


def perfect_value(name: str) -> float:
    """The metric value of a perfectly equivariant model."""
    return 0.0 if name in LOWER_IS_BETTER else 1.0


def metric_polarity(name: str) -> bool:
    """True when larger values are better."""
    return name not in LOWER_IS_BETTER
