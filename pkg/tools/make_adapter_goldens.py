#!/usr/bin/env python3
"""Generate the adapter conformance goldens from the primary encoder.

Writes adapter/tests/golden/*.json. Rerun after any wire-format change:

    python3 tools/make_adapter_goldens.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from nero.actions import (  # noqa: E402
    BBox,
    ClassProbs,
    Detection,
    Detections,
    FlowField,
    ImagePairSample,
    ImageSample,
    PointCloudSample,
)
from nero.modelproto import encode_array, encode_input, encode_output  # noqa: E402

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "adapter" / "tests" / "golden"


def ramp(shape) -> np.ndarray:
    return (np.arange(np.prod(shape), dtype=np.float32) / 8.0).reshape(shape)


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)

    blocks = {
        "image_2x2": {"values": ramp((2, 2, 1)).tolist(), "block": encode_array(ramp((2, 2, 1)))},
        "flow_3x3": {
            "values": ramp((3, 3, 2)).tolist(),
            "block": encode_array(ramp((3, 3, 2))),
        },
        "points_4": {"values": ramp((4, 3)).tolist(), "block": encode_array(ramp((4, 3)))},
    }
    (GOLDEN_DIR / "blocks.json").write_text(json.dumps(blocks, indent=1))

    inputs = {
        "image": encode_input(ImageSample("img-0#3", ramp((4, 4, 1)))),
        "image_pair": encode_input(
            ImagePairSample("pair-1#0", ramp((3, 3, 1)), ramp((3, 3, 1)) + 1.0)
        ),
        "point_cloud": encode_input(PointCloudSample("cloud-2#7", ramp((5, 3)))),
    }
    (GOLDEN_DIR / "inputs.json").write_text(json.dumps(inputs, indent=1))

    outputs = {
        "class_probs": encode_output(ClassProbs(np.array([0.25, 0.25, 0.25, 0.25]))),
        "detections": encode_output(
            Detections(
                (
                    Detection(BBox(1.0, 2.0, 9.5, 12.25, class_index=3), 0.875),
                    Detection(BBox(0.5, 0.5, 4.5, 4.5, class_index=0), 0.125),
                )
            )
        ),
        "flow": encode_output(FlowField(ramp((3, 3, 2)))),
    }
    (GOLDEN_DIR / "outputs.json").write_text(json.dumps(outputs, indent=1))

    # a full exchange: 2 images through a uniform 4-class classifier
    exchange = {
        "request": {
            "inputs": [
                encode_input(ImageSample("a#0", ramp((4, 4, 1)))),
                encode_input(ImageSample("a#1", ramp((4, 4, 1)) * 2.0)),
            ]
        },
        "response": {
            "outputs": [
                encode_output(ClassProbs(np.array([0.25, 0.25, 0.25, 0.25]))),
                encode_output(ClassProbs(np.array([0.25, 0.25, 0.25, 0.25]))),
            ]
        },
    }
    (GOLDEN_DIR / "exchange_classification.json").write_text(json.dumps(exchange, indent=1))
    print(f"wrote goldens to {GOLDEN_DIR}")


if __name__ == "__main__":
    main()
