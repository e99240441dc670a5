"""Result file format: one JSON document per run, with base64 tensor blocks.

Metric-derived numbers (vectors, maps, stats, DR coordinates) are stored as
float64 blocks so a write/read round trip reproduces the in-memory result
exactly; cached model outputs keep the wire protocol's float32. Writes go
through a temp file in the target directory followed by an atomic rename, so
a crashed run never leaves a readable partial result.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .actions import BBox, ClassLabel, FlowField, GroundTruth
from .engine import NeroRecord, NeroResult
from .groups import (
    AxisAngle3D,
    GroupElement,
    Orbit,
    OrbitSpec,
    Rotation2D,
    SquareSym,
    Translation2D,
)
from .metrics import MetricValue, metric_polarity
from .modelproto import ModelDescriptor, decode_array, decode_output, encode_array, encode_output
from .projection import DRLayout

FORMAT = "nero-result/1"


class ResultFormatError(ValueError):
    """Not a readable result file."""


# --- group element / orbit serialization ---


def element_to_json(g: GroupElement) -> dict:
    if isinstance(g, Rotation2D):
        return {"kind": "rotation2d", "angle": g.angle}
    if isinstance(g, Translation2D):
        return {"kind": "translation2d", "tx": g.tx, "ty": g.ty}
    if isinstance(g, SquareSym):
        return {
            "kind": "square_sym",
            "rot": g.rot,
            "reflect": g.reflect,
            "time_reverse": g.time_reverse,
        }
    return {"kind": "axis_angle3d", "axis": list(g.axis), "angle": g.angle}


def element_from_json(payload: dict) -> GroupElement:
    kind = payload["kind"]
    if kind == "rotation2d":
        return Rotation2D(payload["angle"])
    if kind == "translation2d":
        return Translation2D(int(payload["tx"]), int(payload["ty"]))
    if kind == "square_sym":
        return SquareSym(int(payload["rot"]), bool(payload["reflect"]), bool(payload["time_reverse"]))
    if kind == "axis_angle3d":
        return AxisAngle3D(axis=tuple(payload["axis"]), angle=payload["angle"])
    raise ResultFormatError(f"unknown element kind {kind!r}")


def orbit_to_json(orbit: Orbit) -> dict:
    return {
        "kind": orbit.kind,
        "layout_kind": orbit.layout_kind,
        "identity_index": orbit.identity_index,
        "elements": [element_to_json(g) for g in orbit.elements],
        "layout": [[x, y] for x, y in orbit.layout],
    }


def orbit_from_json(payload: dict) -> Orbit:
    return Orbit(
        kind=payload["kind"],
        elements=tuple(element_from_json(e) for e in payload["elements"]),
        layout=tuple((float(x), float(y)) for x, y in payload["layout"]),
        layout_kind=payload["layout_kind"],
        identity_index=int(payload["identity_index"]),
    )


def truth_to_json(y: Optional[GroundTruth]) -> Optional[dict]:
    if y is None:
        return None
    if isinstance(y, ClassLabel):
        return {"kind": "class_label", "index": y.index, "num_classes": y.num_classes}
    if isinstance(y, BBox):
        return {"kind": "bbox", "box": [y.xmin, y.ymin, y.xmax, y.ymax], "class_index": y.class_index}
    if isinstance(y, FlowField):
        return {"kind": "flow", "flow": encode_array(y.vectors)}
    raise ResultFormatError(f"cannot serialize truth of type {type(y).__name__}")


def truth_from_json(payload: Optional[dict]) -> Optional[GroundTruth]:
    if payload is None:
        return None
    kind = payload["kind"]
    if kind == "class_label":
        return ClassLabel(int(payload["index"]), int(payload["num_classes"]))
    if kind == "bbox":
        x0, y0, x1, y1 = payload["box"]
        return BBox(x0, y0, x1, y1, int(payload.get("class_index", 0)))
    if kind == "flow":
        return FlowField(decode_array(payload["flow"]))
    raise ResultFormatError(f"unknown truth kind {kind!r}")


# --- records ---


def _record_to_json(record: NeroRecord) -> dict:
    scalars = record.scalars()
    maps = [v.per_location for v in record.values]
    maps_block = None
    if any(m is not None for m in maps):
        shape = next(m.shape for m in maps if m is not None)
        stacked = np.full((len(maps),) + shape, np.nan)
        for i, m in enumerate(maps):
            if m is not None:
                stacked[i] = m
        maps_block = encode_array(stacked, "<f8")
    return {
        "id": record.sample_id,
        "class_label": record.class_label,
        "values": encode_array(scalars, "<f8"),
        "mean": record.mean,
        "variance": record.variance,
        "nan_count": record.nan_count,
        "maps": maps_block,
        "truth": truth_to_json(record.truth),
        "outputs": [None if o is None else encode_output(o) for o in record.outputs],
        "errors": {str(k): v for k, v in record.errors.items()},
        "input_digest": record.input_digest,
    }


def _record_from_json(payload: dict, higher_is_better: bool) -> NeroRecord:
    scalars = decode_array(payload["values"])
    maps = None
    if payload.get("maps") is not None:
        maps = decode_array(payload["maps"])
    values = []
    for i, v in enumerate(scalars):
        per_loc = None
        if maps is not None and not np.all(np.isnan(maps[i])):
            per_loc = maps[i]
        values.append(MetricValue(float(v), per_loc, higher_is_better))
    outputs = tuple(
        None if o is None else decode_output(o) for o in payload.get("outputs", [])
    )
    return NeroRecord(
        sample_id=payload["id"],
        values=tuple(values),
        mean=float(payload["mean"]),
        variance=float(payload["variance"]),
        nan_count=int(payload["nan_count"]),
        class_label=payload.get("class_label"),
        truth=truth_from_json(payload.get("truth")),
        outputs=outputs,
        errors={int(k): v for k, v in payload.get("errors", {}).items()},
        input_digest=payload.get("input_digest", ""),
    )


# --- whole results ---


def result_to_json(result: NeroResult) -> dict:
    spec = result.orbit_spec
    return {
        "format": FORMAT,
        "run_id": result.run_id,
        "created_at": result.created_at,
        "metric": result.metric_name,
        "metric_higher_is_better": result.metric_higher_is_better,
        "truth_mode": result.truth_mode,
        "model": result.model.to_json(),
        "orbit_spec": {
            "kind": spec.kind,
            "rotation_step_deg": spec.rotation_step_deg,
            "shift_extent": spec.shift_extent,
            "shift_stride": spec.shift_stride,
            "axis_angle_step_deg": spec.axis_angle_step_deg,
            "rot_angle_step_deg": spec.rot_angle_step_deg,
        },
        "orbit": orbit_to_json(result.orbit),
        "aggregate": encode_array(result.aggregate, "<f8"),
        "aggregate_coverage": encode_array(result.aggregate_coverage, "<i8"),
        "aggregate_maps": (
            None if result.aggregate_maps is None else encode_array(result.aggregate_maps, "<f8")
        ),
        "dr": {
            "coords": encode_array(result.dr.coords, "<f8"),
            "explained": list(result.dr.explained),
            "coloring": result.dr.coloring,
            "method": result.dr.method,
        },
        "records": [_record_to_json(r) for r in result.records],
        "notes": result.notes,
    }


def result_from_json(payload: dict) -> NeroResult:
    if payload.get("format") != FORMAT:
        raise ResultFormatError(f"not a {FORMAT} document")
    spec = OrbitSpec(**payload["orbit_spec"])
    higher = bool(payload.get("metric_higher_is_better", metric_polarity(payload["metric"])))
    dr = payload["dr"]
    return NeroResult(
        run_id=payload["run_id"],
        created_at=payload["created_at"],
        orbit_spec=spec,
        orbit=orbit_from_json(payload["orbit"]),
        metric_name=payload["metric"],
        metric_higher_is_better=higher,
        truth_mode=payload["truth_mode"],
        model=ModelDescriptor.from_json(payload["model"]),
        records=tuple(_record_from_json(r, higher) for r in payload["records"]),
        aggregate=decode_array(payload["aggregate"]),
        aggregate_coverage=decode_array(payload["aggregate_coverage"]),
        aggregate_maps=(
            None if payload.get("aggregate_maps") is None else decode_array(payload["aggregate_maps"])
        ),
        dr=DRLayout(
            coords=decode_array(dr["coords"]),
            explained=(float(dr["explained"][0]), float(dr["explained"][1])),
            coloring=dr["coloring"],
            method=dr["method"],
        ),
        notes=payload.get("notes", {}),
    )


def save_result(result: NeroResult, path) -> Path:
    """Serialize and atomically replace ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = json.dumps(result_to_json(result))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_result(path) -> NeroResult:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ResultFormatError(f"cannot read result {path}: {exc}") from exc
    return result_from_json(payload)


def merge_external_projection(result: NeroResult, path) -> NeroResult:
    """Replace the DR layout with externally computed coordinates (see projection)."""
    from dataclasses import replace

    from .projection import load_external_projection

    layout = load_external_projection(path, [r.sample_id for r in result.records])
    return replace(result, dr=layout)


# --- CSV export ---


def export_csv(result: NeroResult, out_dir) -> tuple[Path, Path]:
    """records.csv (sample id, orbit index, value) and aggregate.csv, %.17g floats."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.csv"
    aggregate_path = out_dir / "aggregate.csv"
    with records_path.open("w") as fh:
        fh.write("sample_id,orbit_index,value\n")
        for record in result.records:
            for k, v in enumerate(record.scalars()):
                fh.write(f"{record.sample_id},{k},{v:.17g}\n")
    with aggregate_path.open("w") as fh:
        fh.write("orbit_index,value\n")
        for k, v in enumerate(result.aggregate):
            fh.write(f"{k},{v:.17g}\n")
    return records_path, aggregate_path
