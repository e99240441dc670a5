"""Acceptance suite: one numbered criterion per test, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion. Everything here uses in-process synthetic models only.
"""

import json
import math
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

from nero.actions import (
    ActionContext,
    BBox,
    ClassLabel,
    Detection,
    Detections,
    FlowField,
    ImagePairSample,
    ImageSample,
    PointCloudSample,
)
from nero.config import RunConfig
from nero.consensus import consensus, consensus_metric
from nero.engine import (
    EvalSample,
    NeroRecord,
    aggregate_nero,
    flatness,
    individual_nero,
    run,
)
from nero.groups import (
    AxisAngle3D,
    OrbitSpec,
    Rotation2D,
    SquareSym,
    Translation2D,
    compose,
    enumerate_orbit,
    identity,
    inverse,
    is_identity,
    rotation_matrix3d,
)
from nero.metrics import MetricValue, detection_iou, rmse
from nero.modelproto import SyntheticModel, SyntheticModelSpec, make_wire_id
from nero.projection import pca_project
from nero.results import save_result


def report(criterion: int, name: str, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    print(f"\nCRITERION {criterion} [{name}]: PASS{suffix}", flush=True)


def make_config(orbit_spec, metric, truth="ground_truth", run_id="acc", **kw):
    return RunConfig(
        run_id=run_id,
        manifest_path=Path("."),
        orbit_spec=orbit_spec,
        metric_name=metric,
        truth_mode=truth,
        output_dir=Path("."),
        synthetic=SyntheticModelSpec(kind="oracle"),
        **kw,
    )


def random_element(kind, rng):
    if kind == "rotation2d":
        return Rotation2D(int(rng.integers(0, 1440)) / 4.0)
    if kind == "translation2d":
        return Translation2D(int(rng.integers(-500, 501)), int(rng.integers(-500, 501)))
    if kind == "square_sym":
        return SquareSym(
            int(rng.choice([0, 90, 180, 270])), bool(rng.integers(2)), bool(rng.integers(2))
        )
    axis = rng.normal(size=3)
    return AxisAngle3D(axis=tuple(axis / np.linalg.norm(axis)), angle=float(rng.uniform(0, 180)))


def test_criterion_1_group_axioms():
    """1,000 random triples per kind: exact laws, or 1e-9 relative for 3-D rotations."""
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    for kind in ("rotation2d", "translation2d", "square_sym"):
        e = identity(kind)
        for _ in range(1000):
            a, b, c = (random_element(kind, rng) for _ in range(3))
            assert compose(compose(a, b), c) == compose(a, compose(b, c))
            assert compose(e, a) == a and compose(a, e) == a
            assert compose(a, inverse(a)) == e and compose(inverse(a), a) == e
    for _ in range(1000):
        a, b, c = (random_element("axis_angle3d", rng) for _ in range(3))
        left = rotation_matrix3d(compose(compose(a, b), c))
        right = rotation_matrix3d(compose(a, compose(b, c)))
        assert np.allclose(left, right, rtol=1e-9, atol=1e-9)
        assert np.allclose(
            rotation_matrix3d(compose(a, inverse(a))), np.eye(3), rtol=1e-9, atol=1e-9
        )
        assert is_identity(compose(a, inverse(a)))
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    report(1, "group axioms", f"4,000 triples in {elapsed:.2f}s")


def _flatness_fixtures():
    rng = np.random.default_rng(7)
    image28 = ImageSample("rot-s", rng.random((28, 28, 1)).astype(np.float32))
    source = rng.random((96, 96)).astype(np.float32)
    det = EvalSample(
        x=ImageSample("det-s", source[32:64, 32:64]),
        y=BBox(8, 10, 20, 26),
        ctx=ActionContext(source=source, window_origin=(32, 32)),
    )
    pair = ImagePairSample(
        "flow-s", rng.random((16, 16)).astype(np.float32), rng.random((16, 16)).astype(np.float32)
    )
    cloud = PointCloudSample("pc-s", rng.random((64, 3)))
    return [
        (
            "image-classification",
            OrbitSpec(kind="rotation2d", rotation_step_deg=10),
            "confidence",
            EvalSample(x=image28, y=ClassLabel(2, 4)),
            0.05,  # resampled rotation tolerance on the 28x28 fixture
        ),
        (
            "image-detection",
            OrbitSpec(kind="translation2d", shift_extent=16, shift_stride=8),
            "detection_iou",
            det,
            1e-9,
        ),
        (
            "image-pair-flow",
            OrbitSpec(kind="square_sym"),
            "rmse",
            EvalSample(x=pair, y=FlowField(rng.standard_normal((16, 16, 2)).astype(np.float32))),
            1e-9,
        ),
        (
            "pointcloud-classification",
            OrbitSpec(kind="axis_angle3d", axis_angle_step_deg=45, rot_angle_step_deg=45),
            "confidence",
            EvalSample(x=cloud, y=ClassLabel(0, 3)),
            1e-9,
        ),
    ]


def test_criterion_2_flatness_theorem():
    """Equivariant oracle: flat NERO vector for every modality/group pairing."""
    started = time.perf_counter()
    details = []
    for modality, spec, metric, sample, tol in _flatness_fixtures():
        orbit = enumerate_orbit(spec)
        model = SyntheticModel(
            SyntheticModelSpec(kind="oracle"),
            modality,
            orbit,
            truths={sample.sample_id: sample.y},
        )
        record = individual_nero(
            sample.x, sample.y, orbit, model, metric, ctx=sample.ctx
        )
        flat = flatness(record)
        assert flat < tol, f"{modality}: max-min {flat} >= {tol}"
        details.append(f"{modality} {flat:.2e}<{tol:g}")
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    report(2, "flatness theorem", "; ".join(details) + f"; {elapsed:.2f}s")


def test_criterion_3_consensus_fixed_point():
    """Oracle detector, 9-element translation orbit: consensus == ground truth."""
    rng = np.random.default_rng(11)
    source = rng.random((224, 224)).astype(np.float32)
    y = BBox(40, 48, 72, 76, class_index=1)
    sample = EvalSample(
        x=ImageSample("c3", source[48:176, 48:176]),
        y=y,
        ctx=ActionContext(source=source, window_origin=(48, 48)),
    )
    spec = OrbitSpec(kind="translation2d", shift_extent=32, shift_stride=32)
    orbit = enumerate_orbit(spec)
    assert len(orbit) == 9
    model = SyntheticModel(
        SyntheticModelSpec(kind="oracle"), "image-detection", orbit, truths={"c3": y}
    )
    outputs = [
        model.infer([ImageSample(make_wire_id("c3", k), sample.x.pixels)])[0]
        for k in range(len(orbit))
    ]
    pairs = list(zip(orbit.elements, outputs))
    c = consensus(pairs, orbit.orbit_id)
    for got, want in (
        (c.value.xmin, y.xmin),
        (c.value.ymin, y.ymin),
        (c.value.xmax, y.xmax),
        (c.value.ymax, y.ymax),
    ):
        assert abs(got - want) < 1e-9

    gt_record = individual_nero(
        sample.x, sample.y, orbit, model, "detection_iou", "ground_truth", ctx=sample.ctx
    )
    cons_values = consensus_metric(pairs, "detection_iou", orbit.orbit_id)
    for a, b in zip(gt_record.values, cons_values):
        assert abs(a.value - b.value) < 1e-9
    report(3, "consensus fixed point", "corner error < 1e-9, NERO match < 1e-9")


def raster_iou(a: BBox, b: BBox) -> float:
    inter = union = 0
    for yy in range(int(min(a.ymin, b.ymin)) - 1, int(max(a.ymax, b.ymax)) + 1):
        for xx in range(int(min(a.xmin, b.xmin)) - 1, int(max(a.xmax, b.xmax)) + 1):
            in_a = a.xmin <= xx < a.xmax and a.ymin <= yy < a.ymax
            in_b = b.xmin <= xx < b.xmax and b.ymin <= yy < b.ymax
            inter += in_a and in_b
            union += in_a or in_b
    return inter / union if union else 0.0


def test_criterion_4_metric_oracles():
    """IOU vs raster count (1e-6); RMSE vs two loops (1e-12); scalar/map consistency."""
    rng = np.random.default_rng(13)
    for _ in range(200):
        boxes = []
        for _ in range(2):
            x0, y0 = (int(v) for v in rng.integers(0, 28, size=2))
            boxes.append(
                BBox(x0, y0, x0 + int(rng.integers(1, 12)), y0 + int(rng.integers(1, 12)))
            )
        a, b = boxes
        got = detection_iou(Detections((Detection(a, 0.9),)), b).value
        assert abs(got - raster_iou(a, b)) < 1e-6

    for _ in range(20):
        pred = rng.standard_normal((8, 8, 2)).astype(np.float32)
        gt = rng.standard_normal((8, 8, 2)).astype(np.float32)
        m = rmse(FlowField(pred), FlowField(gt))
        total = 0.0
        for r in range(8):
            for c in range(8):
                dx = float(pred[r, c, 0]) - float(gt[r, c, 0])
                dy = float(pred[r, c, 1]) - float(gt[r, c, 1])
                total += dx * dx + dy * dy
        assert abs(m.value - math.sqrt(total / 64.0)) < 1e-12
        # MetricValue scalar/map consistency on every PIV-style field
        assert abs(m.value - math.sqrt(float((m.per_location**2).mean()))) < 1e-9
    report(4, "metric oracles", "200 IOU boxes @1e-6, 20 RMSE fields @1e-12")


def test_criterion_5_aggregate_identity():
    """50 synthetic records: aggregate and stats match brute-force recomputation."""
    rng = np.random.default_rng(17)
    data = rng.random((50, 16))
    data[rng.random((50, 16)) < 0.04] = np.nan
    records = []
    for i, row in enumerate(data):
        if np.all(np.isnan(row)):
            row[0] = 0.5
        records.append(NeroRecord.from_values(f"r{i}", [MetricValue(float(v)) for v in row]))
    agg = aggregate_nero(records)
    for k in range(16):
        total, count = 0.0, 0
        for i in range(50):
            v = records[i].values[k].value
            if not math.isnan(v):
                total += v
                count += 1
        assert abs(agg[k] - total / count) < 1e-12
    for record in records:
        finite = [v.value for v in record.values if not math.isnan(v.value)]
        mean = sum(finite) / len(finite)
        var = sum((v - mean) ** 2 for v in finite) / len(finite)
        assert abs(record.mean - mean) < 1e-9
        assert abs(record.variance - var) < 1e-9
    report(5, "aggregate identity", "50 records @1e-12, stats @1e-9")


def test_criterion_6_pca_oracle():
    """10 random 6x5 matrices vs dense eigendecomposition; rank-1 second coords ~ 0."""
    rng = np.random.default_rng(19)
    for _ in range(10):
        m = rng.standard_normal((6, 5))
        centered = m - m.mean(axis=0)
        w, v = np.linalg.eigh(centered.T @ centered)
        order = np.argsort(w)[::-1]
        expected = np.zeros((6, 2))
        for i, col in enumerate(order[:2]):
            direction = v[:, col]
            if direction[int(np.argmax(np.abs(direction)))] < 0:
                direction = -direction
            expected[:, i] = centered @ direction
        got = pca_project(m).coords
        assert np.allclose(got, expected, atol=1e-8)

    line = np.linspace(-2, 3, 9)[:, None] @ np.array([[0.3, -1.2, 0.7, 2.0, 0.1]])
    coords = pca_project(line).coords
    assert np.max(np.abs(coords[:, 1])) < 1e-9
    report(6, "pca oracle", "10 matrices @1e-8, rank-1 second coords < 1e-9")


def _detection_dataset(rng, n=2, source_size=300, window=128, extent=64):
    samples, truths = [], {}
    half = window // 2
    for i in range(n):
        sid = f"scene-{i}"
        source = rng.random((source_size, source_size)).astype(np.float32)
        cx = int(rng.integers(extent + half, source_size - extent - half))
        cy = int(rng.integers(extent + half, source_size - extent - half))
        box = BBox(cx - 20.0, cy - 14.0, cx + 20.0, cy + 14.0)
        origin = (cx - half, cy - half)
        samples.append(
            EvalSample(
                x=ImageSample(sid, source[origin[1] : origin[1] + window, origin[0] : origin[0] + window]),
                y=BBox(box.xmin - origin[0], box.ymin - origin[1], box.xmax - origin[0], box.ymax - origin[1]),
                ctx=ActionContext(source=source, window_origin=origin),
                class_label=0,
            )
        )
        truths[sid] = samples[-1].y
    return samples, truths


def test_criterion_7_qualitative_signatures():
    """(a) decay detector: bright center over the +/-64 grid; (b) six/nine confusion."""
    started = time.perf_counter()

    # (a) translation decay profile
    rng = np.random.default_rng(23)
    samples, truths = _detection_dataset(rng, n=2)
    spec = OrbitSpec(kind="translation2d", shift_extent=64, shift_stride=8)
    orbit = enumerate_orbit(spec)
    floor, radius = 0.3, 100.0
    model = SyntheticModel(
        SyntheticModelSpec(kind="decay", floor=floor, radius=radius),
        "image-detection",
        orbit,
        truths=truths,
    )
    result = run(make_config(spec, "detection_iou", run_id="decay"), samples, model)
    radii = np.asarray(orbit.radii_from_identity())
    max_radius = radii.max()
    drop = 1.0 - max(floor, 1.0 - max_radius / radius)
    ident_value = result.aggregate[orbit.identity_index]
    corner_values = result.aggregate[radii == max_radius]
    assert len(corner_values) == 4
    for v in corner_values:
        assert ident_value - v >= drop - 1e-9

    # (b) rotated six/nine confusion
    rng = np.random.default_rng(29)
    cls_samples = []
    cls_truths = {}
    for i, label in enumerate((6, 9)):
        sid = f"digit{label}-{i}"
        cls_samples.append(
            EvalSample(
                x=ImageSample(sid, rng.random((28, 28, 1)).astype(np.float32)),
                y=ClassLabel(label, 10),
                class_label=label,
            )
        )
        cls_truths[sid] = ClassLabel(label, 10)
    rot_spec = OrbitSpec(kind="rotation2d", rotation_step_deg=10)
    rot_orbit = enumerate_orbit(rot_spec)
    confuser = SyntheticModel(
        SyntheticModelSpec(
            kind="confuser", confusion_pairs=((6, 9),), confusion_threshold_deg=150.0
        ),
        "image-classification",
        rot_orbit,
        truths=cls_truths,
        num_classes=10,
    )
    cls_result = run(make_config(rot_spec, "confidence", run_id="confuser"), cls_samples, confuser)
    checked = 0
    partner = {6: 9, 9: 6}
    for record, sample in zip(cls_result.records, cls_samples):
        for k, g in enumerate(rot_orbit.elements):
            if abs(min(g.angle, 360.0 - g.angle) - 170.0) <= 10.0:
                probs = record.outputs[k].probs
                true_label = sample.y.index
                assert probs[partner[true_label]] > probs[true_label]
                checked += 1
    assert checked > 0
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    report(
        7,
        "qualitative signatures",
        f"identity-corner drop >= {drop:.2f}; {checked} confusion checks; {elapsed:.1f}s",
    )


def test_criterion_8_determinism_and_atomicity(tmp_path, monkeypatch):
    """Shuffled dispatch changes nothing; a killed run leaves no readable result."""
    rng = np.random.default_rng(31)
    samples, truths = _detection_dataset(rng, n=2, source_size=160, window=64, extent=32)
    spec = OrbitSpec(kind="translation2d", shift_extent=32, shift_stride=16)
    orbit = enumerate_orbit(spec)
    model = SyntheticModel(
        SyntheticModelSpec(kind="decay", floor=0.5, radius=60.0),
        "image-detection",
        orbit,
        truths=truths,
    )
    config = make_config(spec, "detection_iou", run_id="det", batch_size=3, concurrency=6)
    a = run(config, samples, model)
    b = run(config, samples, model, dispatch_rng=random.Random(12345))

    from nero.results import result_to_json

    payload_a = result_to_json(a)
    payload_b = result_to_json(b)
    payload_a.pop("created_at")
    payload_b.pop("created_at")
    assert json.dumps(payload_a, sort_keys=True) == json.dumps(payload_b, sort_keys=True)

    # atomicity: crash between temp write and publish leaves nothing readable
    target = tmp_path / "results" / "det.json"

    def crash(src, dst):
        raise OSError("killed")

    monkeypatch.setattr(os, "replace", crash)
    with pytest.raises(OSError):
        save_result(a, target)
    monkeypatch.undo()
    assert not target.exists()
    assert list(target.parent.glob("*.json")) == []
    save_result(a, target)
    assert target.exists()
    report(8, "determinism and atomicity", "payloads identical modulo timestamps")
