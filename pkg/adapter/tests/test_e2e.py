"""End-to-end: the evaluation engine drives a model served by this adapter.

The adapter itself never imports the engine; this test harness does, to prove
the two speak the same protocol over real HTTP.
"""

from pathlib import Path

import numpy as np
import pytest

from nero_adapter import AdapterConfig, AdapterServer

nero = pytest.importorskip("nero", reason="the evaluation engine is needed to drive the run")

from nero.actions import ClassLabel, ImageSample  # noqa: E402
from nero.config import RunConfig  # noqa: E402
from nero.engine import EvalSample, run  # noqa: E402
from nero.groups import OrbitSpec  # noqa: E402
from nero.modelproto import HttpModel  # noqa: E402

NUM_CLASSES = 4


def echo_predict(batch):
    """The echo model: uniform probabilities regardless of input."""
    return [np.full(NUM_CLASSES, 1.0 / NUM_CLASSES) for _ in batch]


def test_engine_run_against_adapter_echo_model(tmp_path):
    rng = np.random.default_rng(3)
    samples = [
        EvalSample(
            x=ImageSample(f"s{i}", rng.random((12, 12, 1)).astype(np.float32)),
            y=ClassLabel(i % NUM_CLASSES, NUM_CLASSES),
            class_label=i % NUM_CLASSES,
        )
        for i in range(3)
    ]
    spec = OrbitSpec(kind="rotation2d", rotation_step_deg=45)
    config = RunConfig(
        run_id="adapter-e2e",
        manifest_path=Path("."),
        orbit_spec=spec,
        metric_name="confidence",
        truth_mode="ground_truth",
        output_dir=tmp_path,
        model_url="placeholder",
        batch_size=4,
        concurrency=4,
    )
    adapter_config = AdapterConfig(
        modality="image-classification", class_count=NUM_CLASSES, port=0, name="echo"
    )
    with AdapterServer(echo_predict, adapter_config) as server:
        model = HttpModel(server.url, max_in_flight=4)
        descriptor = model.describe()
        assert descriptor.modality == "image-classification"
        assert descriptor.protocol_version == "1"
        result = run(config, samples, model)

    expected = 1.0 / NUM_CLASSES
    assert len(result.records) == len(samples)
    for record in result.records:
        assert record.nan_count == 0
        for value in record.values:
            assert value.value == expected  # exactly, not approximately
    assert np.all(result.aggregate == expected)


def test_engine_records_nan_for_raising_predict(tmp_path):
    calls = {"n": 0}

    def sometimes_raises(batch):
        calls["n"] += 1
        if calls["n"] % 2 == 0:
            raise RuntimeError("synthetic failure")
        return echo_predict(batch)

    rng = np.random.default_rng(5)
    samples = [
        EvalSample(
            x=ImageSample("only", rng.random((8, 8, 1)).astype(np.float32)),
            y=ClassLabel(0, NUM_CLASSES),
        )
    ]
    spec = OrbitSpec(kind="rotation2d", rotation_step_deg=90)
    config = RunConfig(
        run_id="adapter-nan",
        manifest_path=Path("."),
        orbit_spec=spec,
        metric_name="confidence",
        truth_mode="ground_truth",
        output_dir=tmp_path,
        model_url="placeholder",
        batch_size=1,
        concurrency=1,
    )
    adapter_config = AdapterConfig(modality="image-classification", class_count=NUM_CLASSES, port=0)
    with AdapterServer(sometimes_raises, adapter_config) as server:
        model = HttpModel(server.url, retries=0)
        result = run(config, samples, model)
    record = result.records[0]
    # every second batch failed; exactly those entries are NaN
    assert record.nan_count == 2
    assert sorted(record.errors) == [1, 3]
