"""Dimensionality reduction of per-sample NERO vectors into 2-D scatter coordinates.

PCA only, computed in-house from an SVD of the column-centered matrix.
Externally computed layouts (for nonlinear methods) can be merged instead via
:func:`load_external_projection`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

COLORING_MODES = ("mean", "variance")


@dataclass(frozen=True, eq=False)
class DRLayout:
    """Per-sample 2-D coordinates with explained-variance fractions."""

    coords: np.ndarray  # (S, 2) float64
    explained: tuple[float, float]
    coloring: str = "mean"
    method: str = "pca"

    def __post_init__(self):
        if self.coloring not in COLORING_MODES:
            raise ValueError(f"coloring must be one of {COLORING_MODES}")
        if not (0.0 <= self.explained[1] <= self.explained[0] <= 1.0):
            raise ValueError(f"explained fractions out of order: {self.explained}")


def pca_project(matrix, coloring: str = "mean") -> DRLayout:
    """Project S samples x n orbit-values onto the top-2 principal directions.

    NaN entries are imputed by their column mean first. Sign convention: the
    largest-magnitude entry of each principal direction is made positive.
    Missing components (fewer than 3 samples, or rank below 2) are
    zero-filled.
    """
    m = np.array(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"need an (S, n) matrix with S, n >= 1, got shape {m.shape}")
    nan_cols = np.all(np.isnan(m), axis=0)
    if nan_cols.any():
        raise ValueError(f"columns {np.nonzero(nan_cols)[0].tolist()} are all NaN")
    if np.isnan(m).any():
        means = np.nanmean(m, axis=0)
        m = np.where(np.isnan(m), means, m)

    centered = m - m.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    total = float((sv**2).sum())
    tol = max(m.shape) * np.finfo(np.float64).eps * (sv[0] if sv.size else 0.0)
    rank = int((sv > tol).sum())

    coords = np.zeros((m.shape[0], 2), dtype=np.float64)
    explained = [0.0, 0.0]
    for i in range(min(2, rank)):
        direction = vt[i]
        if direction[int(np.argmax(np.abs(direction)))] < 0:
            direction = -direction
        coords[:, i] = centered @ direction
        explained[i] = float(sv[i] ** 2 / total) if total > 0 else 0.0
    return DRLayout(coords, (explained[0], explained[1]), coloring=coloring)


def color_values(records: Sequence, mode: str) -> np.ndarray:
    """Per-sample color scalars from record stats."""
    if mode not in COLORING_MODES:
        raise ValueError(f"coloring must be one of {COLORING_MODES}")
    return np.array(
        [r.mean if mode == "mean" else r.variance for r in records], dtype=np.float64
    )


def load_external_projection(path, sample_ids: Sequence[str]) -> DRLayout:
    """Read sample id -> (u, v) pairs from a JSON file, in the given id order.

    The extension point for layouts computed elsewhere (t-SNE, UMAP, ...):
    ``{"method": "tsne", "coords": {"<sample id>": [u, v], ...}}``.
    """
    payload = json.loads(Path(path).read_text())
    mapping = payload["coords"]
    missing = [s for s in sample_ids if s not in mapping]
    if missing:
        raise ValueError(f"external projection is missing samples {missing}")
    coords = np.array([mapping[s] for s in sample_ids], dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError("external projection coordinates must be 2-D")
    return DRLayout(coords, (0.0, 0.0), method=str(payload.get("method", "external")))
