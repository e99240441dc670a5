"""Dataset ingestion and sample-construction utilities.

A dataset is a JSON manifest plus payload files next to it: images as PNG (or
shape-annotated base64 float blocks), point clouds and flow fields as the
same base64 tensor convention the wire protocol uses. Detection entries name
one key object each: a source image, the designated crop window, and the
object's box in source coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from .actions import (
    ActionContext,
    BBox,
    ClassLabel,
    FlowField,
    GroundTruth,
    ImagePairSample,
    ImageSample,
    PointCloudSample,
    crop,
)
from .engine import EvalSample
from .modelproto.encoding import MODALITIES, decode_array, encode_array


class ManifestError(ValueError):
    """Malformed or inconsistent dataset manifest."""


@dataclass(frozen=True)
class DatasetManifest:
    modality: str
    samples: tuple[dict, ...]
    provenance: str = ""
    num_classes: Optional[int] = None
    root: Optional[Path] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ManifestError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        ids = [s.get("id") for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ManifestError("sample ids must be unique")

    def resolve(self, rel: str) -> Path:
        base = self.root or Path(".")
        return (base / rel).resolve()


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    return DatasetManifest(
        modality=raw.get("modality", ""),
        samples=tuple(raw.get("samples", [])),
        provenance=raw.get("provenance", ""),
        num_classes=raw.get("num_classes"),
        root=path.parent,
        notes=raw.get("notes", {}),
    )


def save_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    payload = {
        "modality": manifest.modality,
        "provenance": manifest.provenance,
        "num_classes": manifest.num_classes,
        "notes": manifest.notes,
        "samples": list(manifest.samples),
    }
    path.write_text(json.dumps(payload, indent=1))


# --- payload files ---


def load_payload(path) -> np.ndarray:
    """PNG -> float32 in [0, 1]; .json -> decoded tensor block."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        with Image.open(path) as img:
            arr = np.asarray(img, dtype=np.float32) / 255.0
        return arr
    if path.suffix.lower() == ".json":
        return decode_array(json.loads(path.read_text()))
    raise ManifestError(f"unsupported payload type {path.suffix!r} ({path})")


def save_payload(path, array: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".png":
        arr = np.asarray(array)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        Image.fromarray(np.clip(arr * 255.0, 0, 255).astype(np.uint8)).save(path)
        return
    if path.suffix.lower() == ".json":
        dtype = "<f8" if np.asarray(array).dtype == np.float64 else "<f4"
        path.write_text(json.dumps(encode_array(array, dtype)))
        return
    raise ManifestError(f"unsupported payload type {path.suffix!r} ({path})")


# --- sample construction ---


def crop_window(
    source: np.ndarray,
    center: tuple[int, int],
    window: tuple[int, int],
    box: Optional[BBox] = None,
    sample_id: str = "sample",
) -> tuple[ImageSample, Optional[BBox]]:
    """Crop a window centered at ``center`` and re-express the box in window frame."""
    w, h = window
    origin = (center[0] - w // 2, center[1] - h // 2)
    pixels = crop(source, origin, window)
    adjusted = None
    if box is not None:
        adjusted = BBox(
            box.xmin - origin[0],
            box.ymin - origin[1],
            box.xmax - origin[0],
            box.ymax - origin[1],
            box.class_index,
        )
    return ImageSample(sample_id, pixels), adjusted


def filter_detection_samples(
    manifest: DatasetManifest,
    classes: Sequence[int],
    window: tuple[int, int],
    shift_extent: int,
) -> DatasetManifest:
    """Keep samples whose key object is usable for a shifted-crop sweep.

    A sample survives when (1) its class is one of ``classes``, (2) the crop
    window stays inside the source for every shift up to ``shift_extent``,
    and (3) the box covers between 1% and 50% of the window, inclusive.
    """
    wanted = set(classes)
    w, h = window
    kept = []
    for entry in manifest.samples:
        if entry.get("class_index") not in wanted:
            continue
        x0, y0 = entry["window_origin"]
        if "source_size" in entry:
            src_w, src_h = entry["source_size"]
        else:
            src = load_payload(manifest.resolve(entry["source"]))
            src_h, src_w = src.shape[:2]
        if x0 - shift_extent < 0 or y0 - shift_extent < 0:
            continue
        if x0 + w + shift_extent > src_w or y0 + h + shift_extent > src_h:
            continue
        bx0, by0, bx1, by1 = entry["box"]
        ratio = (bx1 - bx0) * (by1 - by0) / float(w * h)
        if not 0.01 <= ratio <= 0.5:
            continue
        kept.append(entry)
    return DatasetManifest(
        modality=manifest.modality,
        samples=tuple(kept),
        provenance=manifest.provenance,
        num_classes=manifest.num_classes,
        root=manifest.root,
        notes=manifest.notes,
    )


# --- loading into engine samples ---


@dataclass
class Dataset:
    modality: str
    samples: list[EvalSample]
    truths: dict[str, GroundTruth]
    num_classes: Optional[int]
    manifest: DatasetManifest


def load_dataset(manifest_path) -> Dataset:
    manifest = load_manifest(manifest_path)
    samples: list[EvalSample] = []
    truths: dict[str, GroundTruth] = {}

    for entry in manifest.samples:
        sid = entry["id"]
        try:
            if manifest.modality in ("image-classification",):
                pixels = load_payload(manifest.resolve(entry["image"]))
                label = ClassLabel(int(entry["label"]["index"]), int(entry["label"]["num_classes"]))
                samples.append(
                    EvalSample(x=ImageSample(sid, pixels), y=label, class_label=label.index)
                )
                truths[sid] = label

            elif manifest.modality == "image-detection":
                source = load_payload(manifest.resolve(entry["source"]))
                x0, y0 = entry["window_origin"]
                w, h = entry["window"]
                pixels = crop(source, (x0, y0), (w, h))
                bx0, by0, bx1, by1 = entry["box"]
                box = BBox(
                    bx0 - x0, by0 - y0, bx1 - x0, by1 - y0, int(entry.get("class_index", 0))
                )
                ctx = ActionContext(source=source, window_origin=(x0, y0))
                samples.append(
                    EvalSample(
                        x=ImageSample(sid, pixels), y=box, ctx=ctx, class_label=box.class_index
                    )
                )
                truths[sid] = box

            elif manifest.modality == "image-pair-flow":
                frame_a = load_payload(manifest.resolve(entry["frame_a"]))
                frame_b = load_payload(manifest.resolve(entry["frame_b"]))
                flow = FlowField(load_payload(manifest.resolve(entry["flow"])))
                if flow.vectors.shape[:2] != frame_a.shape[:2]:
                    raise ManifestError(
                        f"flow shape {flow.vectors.shape[:2]} does not match frames "
                        f"{frame_a.shape[:2]}"
                    )
                samples.append(
                    EvalSample(x=ImagePairSample(sid, frame_a, frame_b), y=flow)
                )
                truths[sid] = flow

            elif manifest.modality == "pointcloud-classification":
                points = load_payload(manifest.resolve(entry["points"]))
                label = ClassLabel(int(entry["label"]["index"]), int(entry["label"]["num_classes"]))
                samples.append(
                    EvalSample(x=PointCloudSample(sid, points), y=label, class_label=label.index)
                )
                truths[sid] = label
            else:
                raise ManifestError(f"unsupported modality {manifest.modality!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ManifestError):
                raise
            raise ManifestError(f"bad sample entry {sid!r}: {exc}") from exc

    return Dataset(
        modality=manifest.modality,
        samples=samples,
        truths=truths,
        num_classes=manifest.num_classes,
        manifest=manifest,
    )
