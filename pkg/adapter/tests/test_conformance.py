"""Protocol conformance against goldens generated by the evaluation engine."""

import json
from pathlib import Path

import numpy as np
import pytest

from nero_adapter import PayloadError, decode_batch, decode_block, encode_block, encode_outputs

GOLDEN = Path(__file__).parent / "golden"


def golden(name: str) -> dict:
    return json.loads((GOLDEN / f"{name}.json").read_text())


def test_blocks_decode_to_stated_values_and_reencode_identically():
    for entry in golden("blocks").values():
        array = decode_block(entry["block"])
        assert np.array_equal(array, np.asarray(entry["values"], dtype=np.float32))
        assert encode_block(array) == entry["block"]


def test_image_input_round_trip_is_byte_identical():
    wire = golden("inputs")["image"]
    (img,) = decode_batch({"inputs": [wire]}, "image-classification")
    reencoded = {"id": wire["id"], "kind": "image", "image": encode_block(img)}
    assert reencoded == wire


def test_image_pair_input_round_trip_is_byte_identical():
    wire = golden("inputs")["image_pair"]
    ((a, b),) = decode_batch({"inputs": [wire]}, "image-pair-flow")
    reencoded = {
        "id": wire["id"],
        "kind": "image_pair",
        "frame_a": encode_block(a),
        "frame_b": encode_block(b),
    }
    assert reencoded == wire


def test_point_cloud_input_round_trip_is_byte_identical():
    wire = golden("inputs")["point_cloud"]
    (pts,) = decode_batch({"inputs": [wire]}, "pointcloud-classification")
    reencoded = {"id": wire["id"], "kind": "point_cloud", "points": encode_block(pts)}
    assert reencoded == wire


def test_encoded_outputs_match_goldens():
    want = golden("outputs")
    assert encode_outputs([np.array([0.25, 0.25, 0.25, 0.25])], "image-classification") == [
        want["class_probs"]
    ]
    detections = [
        [
            {"box": (1.0, 2.0, 9.5, 12.25), "class_index": 3, "confidence": 0.875},
            {"box": (0.5, 0.5, 4.5, 4.5), "class_index": 0, "confidence": 0.125},
        ]
    ]
    assert encode_outputs(detections, "image-detection") == [want["detections"]]
    flow = decode_block(want["flow"]["flow"])
    assert encode_outputs([flow], "image-pair-flow") == [want["flow"]]


def test_full_exchange_matches_golden():
    exchange = golden("exchange_classification")
    batch = decode_batch(exchange["request"], "image-classification")
    assert len(batch) == 2
    results = [np.full(4, 0.25) for _ in batch]
    assert {"outputs": encode_outputs(results, "image-classification")} == exchange["response"]


def test_malformed_payloads_rejected():
    with pytest.raises(PayloadError):
        decode_batch({"inputs": []}, "image-classification")
    with pytest.raises(PayloadError):
        decode_batch({}, "image-classification")
    wire = golden("inputs")["image"]
    bad = dict(wire)
    bad["image"] = {**wire["image"], "shape": [999]}
    with pytest.raises(PayloadError):
        decode_batch({"inputs": [bad]}, "image-classification")
    with pytest.raises(PayloadError):
        decode_batch({"inputs": [wire]}, "image-pair-flow")  # wrong kind for modality
