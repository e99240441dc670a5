"""Ground-truth proxy: the orbit average of inverse-transformed model outputs.

Each model output h(phi(g, x)) is pulled back to the untransformed frame and
the pullbacks are averaged; the average can then stand in for ground truth in
any metric. Detections reduce to their most-confident box before averaging;
orbit elements with no detections at all are skipped and the contributing
count records how many were used.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .actions import (
    BBox,
    ClassProbs,
    Detections,
    FlowField,
    act_output,
    act_output_inverse,
    output_element,
)
from .groups import GroupElement, kind_of
from .metrics import MetricValue, evaluate


class ConsensusError(ValueError):
    """Consensus is undefined: empty input, mixed variants, or no boxes at all."""


ConsensusValue = Union[ClassProbs, BBox, FlowField]


@dataclass(frozen=True, eq=False)
class ConsensusOutput:
    value: ConsensusValue
    orbit_id: str
    contributing: int

    def __post_init__(self):
        if self.contributing < 1:
            raise ConsensusError("consensus needs at least one contributing output")


OrbitOutputs = Sequence[tuple[GroupElement, object]]


def _pullback(g: GroupElement, out):
    return act_output_inverse(output_element(g), out)


def consensus(orbit_outputs: OrbitOutputs, orbit_id: str = "") -> ConsensusOutput:
    """Average the pulled-back outputs into a single ground-truth stand-in."""
    pairs = [(g, out) for g, out in orbit_outputs if out is not None]
    if not pairs:
        raise ConsensusError("consensus of an empty output sequence")
    kinds = {kind_of(g) for g, _ in pairs}
    if len(kinds) > 1:
        raise ConsensusError(f"mixed group kinds {sorted(kinds)}")
    variants = {type(out) for _, out in pairs}
    if len(variants) > 1:
        raise ConsensusError(f"mixed output variants {sorted(v.__name__ for v in variants)}")
    variant = variants.pop()

    if variant is ClassProbs:
        pulled = [_pullback(g, out).probs for g, out in pairs]
        mean = np.mean(pulled, axis=0)
        mean = mean / mean.sum()
        return ConsensusOutput(ClassProbs(mean), orbit_id, len(pulled))

    if variant is Detections:
        boxes = []
        for g, out in pairs:
            if not out.items:
                continue
            best = max(out.items, key=lambda det: det.confidence)
            boxes.append(_pullback(g, best.box))
        if not boxes:
            raise ConsensusError("no detections anywhere on the orbit")
        corners = np.array([[b.xmin, b.ymin, b.xmax, b.ymax] for b in boxes], dtype=np.float64)
        mean = corners.mean(axis=0)
        cls = Counter(b.class_index for b in boxes).most_common(1)[0][0]
        return ConsensusOutput(BBox(*mean, class_index=cls), orbit_id, len(boxes))

    if variant is FlowField:
        pulled = [_pullback(g, out).vectors.astype(np.float64) for g, out in pairs]
        return ConsensusOutput(
            FlowField(np.mean(pulled, axis=0).astype(np.float32)), orbit_id, len(pulled)
        )

    raise ConsensusError(f"cannot average outputs of type {variant.__name__}")


def consensus_metric(
    orbit_outputs: OrbitOutputs, metric_name: str, orbit_id: str = ""
) -> list[MetricValue]:
    """Evaluate a metric over the orbit with consensus standing in for ground truth."""
    c = consensus(orbit_outputs, orbit_id)
    values = []
    for g, out in orbit_outputs:
        if out is None:
            values.append(MetricValue(float("nan")))
            continue
        truth = act_output(output_element(g), c.value)
        values.append(evaluate(metric_name, out, truth))
    return values
