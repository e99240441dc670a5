"""In-process reference models with controlled equivariance.

These realize the model hypothesis for tests and demos without trained
networks:

- ``oracle``: returns exactly the transformed ground truth, so NERO plots
  come out flat at the metric's perfect value.
- ``decay``: performance falls off radially over the orbit layout, emulating
  a model that is only good near the untransformed input.
- ``constant``: the same output for every input.
- ``confuser``: classification that swaps configured label pairs once the
  orbit angle passes a threshold (the rotated six-vs-nine failure mode).

Ground truth is provided out-of-band at construction, keyed by sample id;
the wire ids the engine sends are ``<sample_id>#<orbit_index>``, which is how
a synthetic model knows which orbit element an input was transformed by.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from ..actions import (
    BBox,
    ClassLabel,
    ClassProbs,
    Detection,
    Detections,
    FlowField,
    GroundTruth,
    InputSample,
    ModelOutput,
    act_output,
    output_element,
)
from ..groups import Orbit, Rotation2D
from .encoding import INPUT_KIND_FOR_MODALITY, MODALITIES, PROTOCOL_VERSION
from .errors import BatchLimitError, ModalityMismatchError

SYNTHETIC_KINDS = ("oracle", "decay", "constant", "confuser")


@dataclass(frozen=True)
class ModelDescriptor:
    name: str
    modality: str
    class_count: Optional[int] = None
    max_batch: int = 32
    protocol_version: str = PROTOCOL_VERSION

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if self.max_batch < 1:
            raise ValueError("max batch must be >= 1")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "modality": self.modality,
            "class_count": self.class_count,
            "max_batch": self.max_batch,
            "protocol_version": self.protocol_version,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ModelDescriptor":
        return cls(
            name=payload["name"],
            modality=payload["modality"],
            class_count=payload.get("class_count"),
            max_batch=int(payload["max_batch"]),
            protocol_version=str(payload["protocol_version"]),
        )


@dataclass(frozen=True)
class SyntheticModelSpec:
    """Behavior of a synthetic model.

    ``floor`` and ``radius`` shape the decay profile: the metric-perfect
    value is multiplied by max(floor, 1 - r/radius) where r is the layout
    distance from the identity element. ``confusion_pairs`` lists label pairs
    the confuser swaps once the orbit angle exceeds
    ``confusion_threshold_deg``.
    """

    kind: str = "oracle"
    floor: float = 0.0
    radius: float = 1.0
    confusion_pairs: tuple[tuple[int, int], ...] = ()
    confusion_threshold_deg: float = 90.0

    def __post_init__(self):
        if self.kind not in SYNTHETIC_KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError(f"floor must be in [0, 1], got {self.floor}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(
            self, "confusion_pairs", tuple((int(a), int(b)) for a, b in self.confusion_pairs)
        )


def make_wire_id(sample_id: str, orbit_index: int) -> str:
    return f"{sample_id}#{orbit_index}"


def parse_wire_id(wire_id: str) -> tuple[str, Optional[int]]:
    base, sep, idx = wire_id.rpartition("#")
    if sep and idx.isdigit():
        return base, int(idx)
    return wire_id, None


class SyntheticModel:
    """In-process model implementing describe()/infer() directly."""

    def __init__(
        self,
        spec: SyntheticModelSpec,
        modality: str,
        orbit: Orbit,
        truths: Optional[Mapping[str, GroundTruth]] = None,
        num_classes: Optional[int] = None,
        constant_output: Optional[ModelOutput] = None,
        max_batch: int = 32,
        name: Optional[str] = None,
    ):
        if modality not in MODALITIES:
            raise ValueError(f"unknown modality {modality!r}")
        if spec.kind == "constant" and constant_output is None:
            raise ValueError("constant models need a constant_output")
        if spec.kind in ("oracle", "decay", "confuser") and truths is None:
            raise ValueError(f"{spec.kind} models need ground truths keyed by sample id")
        self.spec = spec
        self.modality = modality
        self.orbit = orbit
        self.truths = dict(truths or {})
        self.num_classes = num_classes
        self.constant_output = constant_output
        self.max_batch = max_batch
        self.name = name or f"synthetic-{spec.kind}"
        self._radii = orbit.radii_from_identity()

    def describe(self) -> ModelDescriptor:
        return ModelDescriptor(
            name=self.name,
            modality=self.modality,
            class_count=self.num_classes,
            max_batch=self.max_batch,
        )

    def infer(self, batch: Sequence[InputSample]) -> list[ModelOutput]:
        if not batch:
            raise BatchLimitError("empty batch")
        if len(batch) > self.max_batch:
            raise BatchLimitError(f"batch of {len(batch)} exceeds max {self.max_batch}")
        expected = INPUT_KIND_FOR_MODALITY[self.modality]
        for x in batch:
            if x.modality != expected:
                raise ModalityMismatchError(
                    f"{self.modality} model got {x.modality} input {x.sample_id!r}"
                )
        return [self._infer_one(x) for x in batch]

    # -- per-kind behavior --

    def _lookup(self, x: InputSample):
        base, k = parse_wire_id(x.sample_id)
        if base not in self.truths:
            raise KeyError(f"no ground truth registered for sample {base!r}")
        if k is None or not 0 <= k < len(self.orbit):
            raise KeyError(f"wire id {x.sample_id!r} does not name an orbit element")
        return self.truths[base], self.orbit.elements[k], k

    def _falloff(self, k: int) -> float:
        return max(self.spec.floor, 1.0 - self._radii[k] / self.spec.radius)

    def _orbit_angle(self, k: int) -> float:
        g = self.orbit.elements[k]
        if isinstance(g, Rotation2D):
            return min(g.angle, 360.0 - g.angle)
        return getattr(g, "angle", 0.0)

    def _infer_one(self, x: InputSample) -> ModelOutput:
        if self.spec.kind == "constant":
            return self.constant_output
        truth, g, k = self._lookup(x)

        if self.spec.kind == "oracle":
            return self._oracle(truth, g)
        if self.spec.kind == "decay":
            return self._decay(truth, g, k)
        return self._confuse(truth, k)

    def _oracle(self, truth: GroundTruth, g) -> ModelOutput:
        moved = act_output(output_element(g), truth)
        if isinstance(moved, ClassLabel):
            return ClassProbs(np.eye(moved.num_classes)[moved.index])
        if isinstance(moved, BBox):
            return Detections((Detection(moved, 1.0),))
        if isinstance(moved, FlowField):
            return moved
        raise ModalityMismatchError(f"oracle cannot emit {type(moved).__name__}")

    def _decay(self, truth: GroundTruth, g, k: int) -> ModelOutput:
        f = self._falloff(k)
        moved = act_output(output_element(g), truth)
        if isinstance(moved, ClassLabel):
            n = moved.num_classes
            probs = np.full(n, (1.0 - f) / (n - 1)) if n > 1 else np.ones(1)
            if n > 1:
                probs[moved.index] = f
            return ClassProbs(probs)
        if isinstance(moved, BBox):
            # slide the true box horizontally so its IOU with the truth is exactly f
            width = moved.xmax - moved.xmin
            shift = width * (1.0 - f) / (1.0 + f)
            return Detections((Detection(moved.shifted(shift, 0.0), 1.0),))
        if isinstance(moved, FlowField):
            off = np.zeros_like(moved.vectors)
            off[:, :, 0] = 1.0 - f
            return FlowField(moved.vectors + off)
        raise ModalityMismatchError(f"decay cannot emit {type(moved).__name__}")

    def _confuse(self, truth: GroundTruth, k: int) -> ModelOutput:
        if not isinstance(truth, ClassLabel):
            raise ModalityMismatchError("confuser models are classification-only")
        n = truth.num_classes
        if n == 1:
            return ClassProbs(np.ones(1))
        partner = dict(self.spec.confusion_pairs)
        partner.update({b: a for a, b in self.spec.confusion_pairs})
        swapped = (
            truth.index in partner
            and self._orbit_angle(k) > self.spec.confusion_threshold_deg
        )
        probs = np.full(n, 0.1 / (n - 1))
        if swapped:
            # the paired wrong label wins; the true label comes second
            probs[partner[truth.index]] = 0.6
            probs[truth.index] = 0.3 + 0.1 / (n - 1)
        else:
            probs[truth.index] = 0.9 + 0.1 / (n - 1)
        return ClassProbs(probs / probs.sum())
