"""Group actions on inputs and outputs, and the data types they act on.

Conventions fixed here (and asserted by tests):

- Images are (H, W, C) float32 arrays; row 0 is displayed at the top. The
  2-D math frame used for rotations and flow vectors is x right / y up, so a
  90 degree rotation is counterclockwise on screen and maps a rightward flow
  vector to an upward one.
- Image rotation resamples by inverse mapping with bilinear interpolation
  about the pixel-grid center ((W-1)/2, (H-1)/2); out-of-bounds reads fill
  with 0. Multiples of 90 degrees on square grids short-circuit to an exact
  pixel permutation.
- A translation element g = (tx, ty) moves the crop window by (tx, ty) in
  source coordinates, so the imaged object moves by (-tx, -ty) in the output
  frame. ``output_element`` maps orbit elements to the output-space element
  matching that convention (the inverse for translations, g itself for every
  other kind).
- Square symmetries apply the reflection (across the vertical axis) first,
  then the rotation; time reversal swaps frame order and negates flow.
- 3-D rotations act on point clouds via the Rodrigues formula about the
  cloud centroid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .groups import (
    AxisAngle3D,
    GroupElement,
    Rotation2D,
    SquareSym,
    Translation2D,
    inverse,
    is_identity,
    kind_of,
)


class ActionError(ValueError):
    """Incompatible group kind / data modality, or out-of-bounds windows."""


# --- input samples -----------------------------------------------------------

MODALITY_IMAGE = "image"
MODALITY_IMAGE_PAIR = "image_pair"
MODALITY_POINT_CLOUD = "point_cloud"


@dataclass(frozen=True, eq=False)
class ImageSample:
    """Single image, (H, W, C) float32."""

    sample_id: str
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or min(px.shape) < 1:
            raise ValueError(f"image must be (H, W, C) with positive dims, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def modality(self) -> str:
        return MODALITY_IMAGE


@dataclass(frozen=True, eq=False)
class ImagePairSample:
    """Two same-shape frames in temporal order."""

    sample_id: str
    frame_a: np.ndarray
    frame_b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.frame_a, dtype=np.float32)
        b = np.asarray(self.frame_b, dtype=np.float32)
        if a.ndim == 2:
            a = a[:, :, None]
        if b.ndim == 2:
            b = b[:, :, None]
        if a.shape != b.shape:
            raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
        if a.ndim != 3 or min(a.shape) < 1:
            raise ValueError(f"frames must be (H, W, C) with positive dims, got {a.shape}")
        object.__setattr__(self, "frame_a", a)
        object.__setattr__(self, "frame_b", b)

    @property
    def modality(self) -> str:
        return MODALITY_IMAGE_PAIR


@dataclass(frozen=True, eq=False)
class PointCloudSample:
    """N x 3 coordinates, expected unit-cube normalized."""

    sample_id: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite values")
        object.__setattr__(self, "points", pts)

    @property
    def modality(self) -> str:
        return MODALITY_POINT_CLOUD


InputSample = Union[ImageSample, ImagePairSample, PointCloudSample]


@dataclass(frozen=True, eq=False)
class ActionContext:
    """Extra data some actions need; translations require the uncropped source.

    ``window_origin`` is the (x, y) of the identity crop's top-left corner in
    source coordinates.
    """

    source: Optional[np.ndarray] = None
    window_origin: Optional[tuple[int, int]] = None


# --- ground truth and model outputs ------------------------------------------


@dataclass(frozen=True)
class ClassLabel:
    index: int
    num_classes: int

    def __post_init__(self):
        if not 0 <= self.index < self.num_classes:
            raise ValueError(f"label index {self.index} outside [0, {self.num_classes})")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, corners in pixels, xmin < xmax and ymin < ymax."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float
    class_index: int = 0

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(
                f"degenerate box ({self.xmin}, {self.ymin}, {self.xmax}, {self.ymax})"
            )

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def shifted(self, tx: float, ty: float) -> "BBox":
        return BBox(self.xmin + tx, self.ymin + ty, self.xmax + tx, self.ymax + ty, self.class_index)


@dataclass(frozen=True, eq=False)
class FlowField:
    """(H, W, 2) float32 vectors, components (vx, vy) with y up."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float32)
        if v.ndim != 3 or v.shape[2] != 2 or min(v.shape[:2]) < 1:
            raise ValueError(f"flow field must be (H, W, 2), got {v.shape}")
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True, eq=False)
class ClassProbs:
    """Probability vector over classes; entries >= 0 summing to 1 within 1e-6."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError(f"probs must be a nonempty vector, got shape {p.shape}")
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-6:
            raise ValueError("probs must be nonnegative and sum to 1 within 1e-6")
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class Detection:
    box: BBox
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class Detections:
    items: tuple[Detection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))


GroundTruth = Union[ClassLabel, BBox, FlowField]
ModelOutput = Union[ClassProbs, Detections, FlowField]


# --- array-level transforms ---------------------------------------------------


def rotate_image(pixels: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotate (H, W, C) counterclockwise by ``angle_deg`` about the grid center."""
    h, w = pixels.shape[:2]
    angle = float(angle_deg) % 360.0
    if angle % 90.0 == 0.0 and (angle % 180.0 == 0.0 or h == w):
        return np.ascontiguousarray(np.rot90(pixels, int(angle // 90)))
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = math.radians(angle)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    x = cols - cx
    y = cy - rows  # y up
    xs = x * cos_t + y * sin_t  # inverse rotation
    ys = -x * sin_t + y * cos_t
    src_c = xs + cx
    src_r = cy - ys
    return _bilinear_sample(pixels, src_r, src_c)


def _bilinear_sample(pixels: np.ndarray, src_r: np.ndarray, src_c: np.ndarray) -> np.ndarray:
    h, w = pixels.shape[:2]
    r0 = np.floor(src_r).astype(np.int64)
    c0 = np.floor(src_c).astype(np.int64)
    fr = (src_r - r0).astype(pixels.dtype)
    fc = (src_c - c0).astype(pixels.dtype)
    out = np.zeros(src_r.shape + pixels.shape[2:], dtype=pixels.dtype)
    for dr, dc, weight in (
        (0, 0, (1 - fr) * (1 - fc)),
        (0, 1, (1 - fr) * fc),
        (1, 0, fr * (1 - fc)),
        (1, 1, fr * fc),
    ):
        rr, cc = r0 + dr, c0 + dc
        valid = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        vals = pixels[np.clip(rr, 0, h - 1), np.clip(cc, 0, w - 1)]
        out += np.where(valid[..., None], weight[..., None] * vals, 0)
    return out


_ROT_MATRICES = {
    0: np.array([[1, 0], [0, 1]], dtype=np.float64),
    90: np.array([[0, -1], [1, 0]], dtype=np.float64),
    180: np.array([[-1, 0], [0, -1]], dtype=np.float64),
    270: np.array([[0, 1], [-1, 0]], dtype=np.float64),
}
_MIRROR = np.array([[-1, 0], [0, 1]], dtype=np.float64)


def square_sym_matrix(g: SquareSym) -> np.ndarray:
    """2x2 orthogonal matrix of the spatial part, in the x-right / y-up frame."""
    m = _ROT_MATRICES[g.rot]
    if g.reflect:
        m = m @ _MIRROR
    return m


def square_sym_array(arr: np.ndarray, g: SquareSym) -> np.ndarray:
    """Permute an (H, W, ...) grid by the spatial part of ``g`` (exact, no resampling)."""
    out = arr
    if g.reflect:
        out = np.flip(out, axis=1)
    k = (g.rot // 90) % 4
    if k:
        out = np.rot90(out, k, axes=(0, 1))
    return np.ascontiguousarray(out)


def rodrigues_rotate(points: np.ndarray, axis, angle_deg: float) -> np.ndarray:
    """Rotate (N, 3) points about their centroid by angle_deg around ``axis``."""
    pts = np.asarray(points, dtype=np.float64)
    k = np.asarray(axis, dtype=np.float64)
    k = k / np.linalg.norm(k)
    theta = math.radians(angle_deg)
    centroid = pts.mean(axis=0)
    p = pts - centroid
    rotated = (
        p * math.cos(theta)
        + np.cross(k, p) * math.sin(theta)
        + np.outer(p @ k, k) * (1.0 - math.cos(theta))
    )
    return rotated + centroid


# --- the input action ----------------------------------------------------------


def act_input(g: GroupElement, x: InputSample, ctx: Optional[ActionContext] = None) -> InputSample:
    """x' = phi(g, x). The identity returns ``x`` unchanged, bit-exact."""
    if is_identity(g):
        return x

    if isinstance(g, Rotation2D):
        if not isinstance(x, ImageSample):
            raise ActionError(f"rotation2d acts on images, not {x.modality}")
        return ImageSample(x.sample_id, rotate_image(x.pixels, g.angle))

    if isinstance(g, Translation2D):
        if not isinstance(x, ImageSample):
            raise ActionError(f"translation2d acts on images, not {x.modality}")
        if ctx is None or ctx.source is None or ctx.window_origin is None:
            raise ActionError("translation needs an ActionContext with source and window origin")
        h, w = x.pixels.shape[:2]
        x0, y0 = ctx.window_origin
        return ImageSample(x.sample_id, crop(ctx.source, (x0 + g.tx, y0 + g.ty), (w, h)))

    if isinstance(g, SquareSym):
        if not isinstance(x, ImagePairSample):
            raise ActionError(f"square_sym acts on image pairs, not {x.modality}")
        a = square_sym_array(x.frame_a, g)
        b = square_sym_array(x.frame_b, g)
        if g.time_reverse:
            a, b = b, a
        return ImagePairSample(x.sample_id, a, b)

    if isinstance(g, AxisAngle3D):
        if not isinstance(x, PointCloudSample):
            raise ActionError(f"axis_angle3d acts on point clouds, not {x.modality}")
        return PointCloudSample(x.sample_id, rodrigues_rotate(x.points, g.axis, g.angle))

    raise ActionError(f"unsupported group kind {kind_of(g)}")


def crop(source: np.ndarray, origin: tuple[int, int], window: tuple[int, int]) -> np.ndarray:
    """Extract a (h, w) window whose top-left is at source (x, y) = ``origin``."""
    src = np.asarray(source)
    if src.ndim == 2:
        src = src[:, :, None]
    x0, y0 = origin
    w, h = window
    if x0 < 0 or y0 < 0 or x0 + w > src.shape[1] or y0 + h > src.shape[0]:
        raise ActionError(
            f"window {window} at origin {origin} exceeds source bounds {src.shape[1::-1]}"
        )
    return np.ascontiguousarray(src[y0 : y0 + h, x0 : x0 + w])


# --- the output action ----------------------------------------------------------

OutputValue = Union[ClassLabel, ClassProbs, BBox, FlowField, Detections]


def act_output(g: GroupElement, y: OutputValue) -> OutputValue:
    """y' = phi-tilde(g, y): identity on class outputs, shift on boxes, covariant on flows."""
    if isinstance(y, (ClassLabel, ClassProbs)):
        return y

    if isinstance(y, BBox):
        if not isinstance(g, Translation2D):
            raise ActionError(f"boxes only transform under translations, not {kind_of(g)}")
        return y.shifted(g.tx, g.ty)

    if isinstance(y, Detections):
        if not isinstance(g, Translation2D):
            raise ActionError(f"boxes only transform under translations, not {kind_of(g)}")
        return Detections(tuple(Detection(d.box.shifted(g.tx, g.ty), d.confidence) for d in y.items))

    if isinstance(y, FlowField):
        if not isinstance(g, SquareSym):
            raise ActionError(f"flow fields only transform under square_sym, not {kind_of(g)}")
        # V'(p) = R V(R^-1 p); time reversal negates the vectors
        moved = square_sym_array(y.vectors, g)
        rot = square_sym_matrix(g).astype(np.float32)
        out = moved @ rot.T
        if g.time_reverse:
            out = -out
        return FlowField(out)

    raise ActionError(f"cannot transform output of type {type(y).__name__}")


def act_output_inverse(g: GroupElement, y: OutputValue) -> OutputValue:
    """Inverse of :func:`act_output`: round-trips exactly for permutation/shift actions."""
    return act_output(inverse(g), y)


def output_element(g: GroupElement) -> GroupElement:
    """Output-space element matching act_input's convention for orbit element g.

    For translations the crop window moves by (tx, ty), so the object (and
    its box) moves by the inverse; every other action transforms outputs by
    g itself.
    """
    return inverse(g) if isinstance(g, Translation2D) else g
