"""JSON wire encoding for the model inference protocol.

Bulk numeric data travels as shape-annotated base64 blocks of little-endian
32-bit floats; everything else is plain JSON. Field-by-field schema docs live
in docs/protocol.md.
"""

from __future__ import annotations

import base64
from typing import Any

import numpy as np

from ..actions import (
    BBox,
    ClassProbs,
    Detection,
    Detections,
    FlowField,
    ImagePairSample,
    ImageSample,
    InputSample,
    ModelOutput,
    PointCloudSample,
)

PROTOCOL_VERSION = "1"

MODALITIES = (
    "image-classification",
    "image-detection",
    "image-pair-flow",
    "pointcloud-classification",
)

# input variant expected per modality
INPUT_KIND_FOR_MODALITY = {
    "image-classification": "image",
    "image-detection": "image",
    "image-pair-flow": "image_pair",
    "pointcloud-classification": "point_cloud",
}


class WireError(ValueError):
    """Malformed payload."""


def encode_array(a: np.ndarray, dtype: str = "<f4") -> dict:
    arr = np.ascontiguousarray(np.asarray(a), dtype=np.dtype(dtype))
    return {
        "shape": list(arr.shape),
        "dtype": dtype,
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def decode_array(block: Any) -> np.ndarray:
    if not isinstance(block, dict):
        raise WireError(f"tensor block must be an object, got {type(block).__name__}")
    try:
        shape = tuple(int(s) for s in block["shape"])
        dtype = np.dtype(block["dtype"])
        raw = base64.b64decode(block["data"], validate=True)
    except (KeyError, TypeError, ValueError) as exc:
        raise WireError(f"bad tensor block: {exc}") from exc
    expected = int(np.prod(shape)) * dtype.itemsize if shape else dtype.itemsize
    if len(raw) != expected:
        raise WireError(f"tensor data has {len(raw)} bytes, shape {shape} needs {expected}")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def encode_input(x: InputSample) -> dict:
    if isinstance(x, ImageSample):
        return {"id": x.sample_id, "kind": "image", "image": encode_array(x.pixels)}
    if isinstance(x, ImagePairSample):
        return {
            "id": x.sample_id,
            "kind": "image_pair",
            "frame_a": encode_array(x.frame_a),
            "frame_b": encode_array(x.frame_b),
        }
    if isinstance(x, PointCloudSample):
        return {"id": x.sample_id, "kind": "point_cloud", "points": encode_array(x.points)}
    raise WireError(f"cannot encode input of type {type(x).__name__}")


def decode_input(payload: Any) -> InputSample:
    if not isinstance(payload, dict):
        raise WireError("input must be an object")
    sample_id = payload.get("id")
    kind = payload.get("kind")
    if not isinstance(sample_id, str) or not sample_id:
        raise WireError("input is missing a string id")
    if kind == "image":
        return ImageSample(sample_id, decode_array(payload.get("image")))
    if kind == "image_pair":
        return ImagePairSample(
            sample_id, decode_array(payload.get("frame_a")), decode_array(payload.get("frame_b"))
        )
    if kind == "point_cloud":
        return PointCloudSample(sample_id, decode_array(payload.get("points")))
    raise WireError(f"unknown input kind {kind!r}")


def encode_output(y: ModelOutput) -> dict:
    if isinstance(y, ClassProbs):
        return {"kind": "class_probs", "class_probs": [float(p) for p in y.probs]}
    if isinstance(y, Detections):
        return {
            "kind": "detections",
            "detections": [
                {
                    "box": [d.box.xmin, d.box.ymin, d.box.xmax, d.box.ymax],
                    "class_index": d.box.class_index,
                    "confidence": d.confidence,
                }
                for d in y.items
            ],
        }
    if isinstance(y, FlowField):
        return {"kind": "flow", "flow": encode_array(y.vectors)}
    raise WireError(f"cannot encode output of type {type(y).__name__}")


def decode_output(payload: Any) -> ModelOutput:
    if not isinstance(payload, dict):
        raise WireError("output must be an object")
    kind = payload.get("kind")
    try:
        if kind == "class_probs":
            return ClassProbs(np.asarray(payload["class_probs"], dtype=np.float64))
        if kind == "detections":
            items = []
            for d in payload["detections"]:
                x0, y0, x1, y1 = d["box"]
                items.append(
                    Detection(
                        BBox(x0, y0, x1, y1, class_index=int(d.get("class_index", 0))),
                        float(d["confidence"]),
                    )
                )
            return Detections(tuple(items))
        if kind == "flow":
            flow = decode_array(payload["flow"])
            return FlowField(flow)
    except WireError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise WireError(f"bad {kind} output: {exc}") from exc
    raise WireError(f"unknown output kind {kind!r}")
