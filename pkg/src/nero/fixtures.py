"""Procedural desk-scale fixture datasets, one generator per modality.

These stand in for the big public datasets: smooth drawn shapes for
classification, gradient scenes with one key rectangle for detection,
analytic flows (uniform / rigid rotation / shear) for the image-pair
modality, and parametric point clouds (box, sphere, helix). Everything is
seeded, so generated datasets are bit-reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataprep import DatasetManifest, load_dataset, save_manifest, save_payload

CLASS_SHAPES = ("disk", "ring", "cross", "stripes")
CLOUD_SHAPES = ("box", "sphere", "helix")


def _blob(size: int, cx: float, cy: float, radius: float) -> np.ndarray:
    ys, xs = np.mgrid[0:size, 0:size]
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    return np.clip(1.0 - d / radius, 0.0, 1.0)


def draw_shape(kind: str, size: int, rng) -> np.ndarray:
    """One smooth [0, 1] image per class kind, with mild position jitter."""
    cx = size / 2 + rng.uniform(-2, 2)
    cy = size / 2 + rng.uniform(-2, 2)
    ys, xs = np.mgrid[0:size, 0:size]
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    if kind == "disk":
        img = np.clip((size / 4 - d) / 2.0 + 0.5, 0, 1)
    elif kind == "ring":
        img = np.clip(1.0 - np.abs(d - size / 4) / 3.0, 0, 1)
    elif kind == "cross":
        img = np.maximum(
            np.clip(1.0 - np.abs(xs - cx) / 2.5, 0, 1), np.clip(1.0 - np.abs(ys - cy) / 2.5, 0, 1)
        )
        img *= np.clip((size / 2.2 - d) / 3.0 + 0.5, 0, 1)
    elif kind == "stripes":
        img = 0.5 + 0.5 * np.sin((xs - cx) * 2.0 * np.pi / 7.0)
        img *= np.clip((size / 3.0 - d) / 3.0 + 0.5, 0, 1)
    else:
        raise ValueError(f"unknown shape {kind!r}")
    return img.astype(np.float32)


def make_classification_fixture(root, per_class: int = 3, size: int = 28, seed: int = 0) -> Path:
    root = Path(root)
    rng = np.random.default_rng(seed)
    entries = []
    for cls, kind in enumerate(CLASS_SHAPES):
        for i in range(per_class):
            sid = f"{kind}-{i}"
            rel = f"payloads/{sid}.png"
            save_payload(root / rel, draw_shape(kind, size, rng))
            entries.append(
                {
                    "id": sid,
                    "image": rel,
                    "label": {"index": cls, "num_classes": len(CLASS_SHAPES)},
                }
            )
    manifest = DatasetManifest(
        modality="image-classification",
        samples=tuple(entries),
        provenance=f"synthetic shapes, seed {seed}",
        num_classes=len(CLASS_SHAPES),
        root=root,
    )
    path = root / "manifest.json"
    save_manifest(manifest, path)
    return path


def make_detection_fixture(
    root,
    n: int = 4,
    source_size: int = 300,
    window: int = 128,
    shift_extent: int = 64,
    seed: int = 0,
) -> Path:
    """Scenes with one key rectangle each, croppable for every shift in range."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    entries = []
    half = window // 2
    for i in range(n):
        sid = f"scene-{i}"
        ys, xs = np.mgrid[0:source_size, 0:source_size]
        img = 0.25 + 0.5 * xs / source_size * (ys / source_size)
        for _ in range(5):  # background clutter
            img += 0.3 * _blob(
                source_size, rng.uniform(0, source_size), rng.uniform(0, source_size), 12.0
            )
        bw = int(rng.integers(window // 6, window // 3))
        bh = int(rng.integers(window // 6, window // 3))
        lo = shift_extent + half
        hi = source_size - shift_extent - half
        cx = int(rng.integers(lo, hi))
        cy = int(rng.integers(lo, hi))
        x0, y0 = cx - bw // 2, cy - bh // 2
        img[y0 : y0 + bh, x0 : x0 + bw] = 1.0
        rel = f"payloads/{sid}.png"
        save_payload(root / rel, np.clip(img, 0, 1).astype(np.float32))
        entries.append(
            {
                "id": sid,
                "source": rel,
                "source_size": [source_size, source_size],
                "window": [window, window],
                "window_origin": [cx - half, cy - half],
                "box": [x0, y0, x0 + bw, y0 + bh],
                "class_index": int(rng.integers(0, 5)),
            }
        )
    manifest = DatasetManifest(
        modality="image-detection",
        samples=tuple(entries),
        provenance=f"synthetic scenes, seed {seed}",
        root=root,
    )
    path = root / "manifest.json"
    save_manifest(manifest, path)
    return path


def analytic_flow(kind: str, size: int, scale: float = 1.5) -> np.ndarray:
    """Analytic (H, W, 2) fields: vectors are (vx, vy) with y up."""
    ys, xs = np.mgrid[0:size, 0:size]
    x = xs - (size - 1) / 2.0
    y = (size - 1) / 2.0 - ys
    flow = np.zeros((size, size, 2), dtype=np.float32)
    if kind == "uniform":
        flow[:, :, 0] = scale
    elif kind == "rotation":  # rigid body rotation about the center
        omega = scale / size
        flow[:, :, 0] = -omega * y
        flow[:, :, 1] = omega * x
    elif kind == "shear":
        flow[:, :, 0] = scale * y / size
    else:
        raise ValueError(f"unknown flow kind {kind!r}")
    return flow


def particle_frame(size: int, rng, n_particles: int = 60) -> np.ndarray:
    img = np.zeros((size, size), dtype=np.float32)
    for _ in range(n_particles):
        img += _blob(size, rng.uniform(0, size), rng.uniform(0, size), 1.8)
    return np.clip(img, 0, 1)


def make_flow_fixture(root, size: int = 16, seed: int = 0) -> Path:
    root = Path(root)
    rng = np.random.default_rng(seed)
    entries = []
    for i, kind in enumerate(("uniform", "rotation", "shear")):
        sid = f"{kind}-{i}"
        frame_a = particle_frame(size, rng)
        flow = analytic_flow(kind, size)
        # advect roughly: pixel shift by the rounded local flow (y up -> row down)
        frame_b = np.zeros_like(frame_a)
        for r in range(size):
            for c in range(size):
                rr = int(round(r - flow[r, c, 1]))
                cc = int(round(c + flow[r, c, 0]))
                if 0 <= rr < size and 0 <= cc < size:
                    frame_b[rr, cc] = max(frame_b[rr, cc], frame_a[r, c])
        rel_a, rel_b, rel_f = (
            f"payloads/{sid}_a.png",
            f"payloads/{sid}_b.png",
            f"payloads/{sid}_flow.json",
        )
        save_payload(root / rel_a, frame_a)
        save_payload(root / rel_b, frame_b)
        save_payload(root / rel_f, flow)
        entries.append({"id": sid, "frame_a": rel_a, "frame_b": rel_b, "flow": rel_f})
    manifest = DatasetManifest(
        modality="image-pair-flow",
        samples=tuple(entries),
        provenance=f"analytic flows, seed {seed}",
        root=root,
    )
    path = root / "manifest.json"
    save_manifest(manifest, path)
    return path


def parametric_cloud(kind: str, n_points: int, rng) -> np.ndarray:
    if kind == "box":
        pts = rng.uniform(-1, 1, size=(n_points, 3))
        axis = rng.integers(0, 3, size=n_points)
        sign = rng.choice([-1.0, 1.0], size=n_points)
        pts[np.arange(n_points), axis] = sign  # project onto the surface
    elif kind == "sphere":
        pts = rng.normal(size=(n_points, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    elif kind == "helix":
        t = np.linspace(0, 4 * np.pi, n_points)
        pts = np.stack([np.cos(t), np.sin(t), t / (2 * np.pi) - 1.0], axis=1)
        pts += rng.normal(scale=0.02, size=pts.shape)
    else:
        raise ValueError(f"unknown cloud kind {kind!r}")
    # unit-cube normalize
    pts = pts - pts.min(axis=0)
    span = pts.max(axis=0)
    span[span == 0] = 1.0
    return (pts / span.max()).astype(np.float32)


def make_pointcloud_fixture(root, per_class: int = 2, n_points: int = 96, seed: int = 0) -> Path:
    root = Path(root)
    rng = np.random.default_rng(seed)
    entries = []
    for cls, kind in enumerate(CLOUD_SHAPES):
        for i in range(per_class):
            sid = f"{kind}-{i}"
            rel = f"payloads/{sid}.json"
            save_payload(root / rel, parametric_cloud(kind, n_points, rng))
            entries.append(
                {
                    "id": sid,
                    "points": rel,
                    "label": {"index": cls, "num_classes": len(CLOUD_SHAPES)},
                }
            )
    manifest = DatasetManifest(
        modality="pointcloud-classification",
        samples=tuple(entries),
        provenance=f"parametric clouds, seed {seed}",
        num_classes=len(CLOUD_SHAPES),
        root=root,
    )
    path = root / "manifest.json"
    save_manifest(manifest, path)
    return path


MAKERS = {
    "image-classification": make_classification_fixture,
    "image-detection": make_detection_fixture,
    "image-pair-flow": make_flow_fixture,
    "pointcloud-classification": make_pointcloud_fixture,
}


def make_fixture(modality: str, root, **kwargs) -> Path:
    """Generate one fixture dataset and return its manifest path."""
    if modality not in MAKERS:
        raise ValueError(f"no fixture generator for {modality!r}")
    return MAKERS[modality](root, **kwargs)


def load_fixture(modality: str, root, **kwargs):
    """Generate (if needed) and load a fixture dataset in one step."""
    root = Path(root)
    manifest = root / "manifest.json"
    if not manifest.exists():
        make_fixture(modality, root, **kwargs)
    return load_dataset(manifest)
