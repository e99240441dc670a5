"""Transform groups, their algebra, and orbit discretization.

Four group kinds are supported:

- ``rotation2d``: planar rotations, stored in degrees so canonical equality
  stays exact for common steps.
- ``translation2d``: integer pixel shifts.
- ``square_sym``: the 16-element group of square symmetries times frame
  reversal (4 rotations x 2 reflections x 2 time senses).
- ``axis_angle3d``: 3-D rotations in axis-angle form. Orbits are enumerated
  with the axis constrained to one of the three coordinate planes, but the
  group itself is the full rotation group: composing two plane-constrained
  rotations generally leaves the plane, so elements carry an arbitrary unit
  axis and ``from_plane`` is the constructor used for enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

ROTATION2D = "rotation2d"
TRANSLATION2D = "translation2d"
SQUARE_SYM = "square_sym"
AXIS_ANGLE3D = "axis_angle3d"

GROUP_KINDS = (ROTATION2D, TRANSLATION2D, SQUARE_SYM, AXIS_ANGLE3D)

PLANES = ("XY", "XZ", "YZ")

_IDENTITY_AXIS = (1.0, 0.0, 0.0)


class KindMismatchError(TypeError):
    """Raised when composing group elements of different kinds."""


class InvalidSpecError(ValueError):
    """Raised for orbit specs that cannot produce a closed, identity-bearing orbit."""


@dataclass(frozen=True)
class Rotation2D:
    """Planar rotation by ``angle`` degrees, canonical in [0, 360)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % 360.0)


@dataclass(frozen=True)
class Translation2D:
    """Integer pixel shift (tx, ty)."""

    tx: int
    ty: int

    def __post_init__(self):
        if not (isinstance(self.tx, int) and isinstance(self.ty, int)):
            raise ValueError("translation components must be integers")


@dataclass(frozen=True)
class SquareSym:
    """Square symmetry: reflect (across the vertical axis) first, then rotate.

    ``rot`` is one of {0, 90, 180, 270}; ``time_reverse`` flips frame order
    (and flow sign) independently of the spatial part.
    """

    rot: int = 0
    reflect: bool = False
    time_reverse: bool = False

    def __post_init__(self):
        if self.rot not in (0, 90, 180, 270):
            raise ValueError(f"rot must be one of 0/90/180/270, got {self.rot}")


@dataclass(frozen=True)
class AxisAngle3D:
    """Rotation by ``angle`` degrees about unit ``axis``, angle canonical in [0, 180].

    Use :meth:`from_plane` to build the plane-constrained elements the orbit
    layouts are parameterized by; ``plane_form`` recovers that parameterization
    when the axis lies in a coordinate plane.
    """

    axis: tuple[float, float, float] = _IDENTITY_AXIS
    angle: float = 0.0

    def __post_init__(self):
        ax = tuple(float(a) for a in self.axis)
        norm = math.sqrt(ax[0] ** 2 + ax[1] ** 2 + ax[2] ** 2)
        if not math.isfinite(norm) or norm < 1e-12:
            raise ValueError("axis must be a nonzero finite vector")
        if abs(norm - 1.0) > 1e-9:
            ax = (ax[0] / norm, ax[1] / norm, ax[2] / norm)
        ang = float(self.angle)
        if not 0.0 <= ang <= 180.0:
            raise ValueError(f"rotation angle must be in [0, 180], got {ang}")
        if ang == 0.0:
            ax = _IDENTITY_AXIS
        object.__setattr__(self, "axis", ax)
        object.__setattr__(self, "angle", ang)

    @classmethod
    def from_plane(cls, plane: str, axis_angle: float, rot_angle: float) -> "AxisAngle3D":
        """Axis at ``axis_angle`` degrees from the plane's horizontal axis."""
        if plane not in PLANES:
            raise ValueError(f"plane must be one of {PLANES}, got {plane!r}")
        a = math.radians(float(axis_angle) % 360.0)
        c, s = math.cos(a), math.sin(a)
        if plane == "XY":
            axis = (c, s, 0.0)
        elif plane == "XZ":
            axis = (c, 0.0, s)
        else:
            axis = (0.0, c, s)
        return cls(axis=axis, angle=rot_angle)

    def plane_form(self, tol: float = 1e-9) -> Optional[tuple[str, float]]:
        """(plane, axis angle in degrees) if the axis lies in a coordinate plane."""
        x, y, z = self.axis
        if abs(z) <= tol:
            return "XY", math.degrees(math.atan2(y, x)) % 360.0
        if abs(y) <= tol:
            return "XZ", math.degrees(math.atan2(z, x)) % 360.0
        if abs(x) <= tol:
            return "YZ", math.degrees(math.atan2(z, y)) % 360.0
        return None

    def quaternion(self) -> tuple[float, float, float, float]:
        """(w, x, y, z) with w >= 0."""
        half = math.radians(self.angle) / 2.0
        s = math.sin(half)
        return (math.cos(half), self.axis[0] * s, self.axis[1] * s, self.axis[2] * s)


GroupElement = Union[Rotation2D, Translation2D, SquareSym, AxisAngle3D]

_KIND_BY_TYPE = {
    Rotation2D: ROTATION2D,
    Translation2D: TRANSLATION2D,
    SquareSym: SQUARE_SYM,
    AxisAngle3D: AXIS_ANGLE3D,
}


def kind_of(g: GroupElement) -> str:
    try:
        return _KIND_BY_TYPE[type(g)]
    except KeyError:
        raise TypeError(f"not a group element: {g!r}") from None


def identity(kind: str) -> GroupElement:
    """The identity element of the given group kind."""
    if kind == ROTATION2D:
        return Rotation2D(0.0)
    if kind == TRANSLATION2D:
        return Translation2D(0, 0)
    if kind == SQUARE_SYM:
        return SquareSym(0, False, False)
    if kind == AXIS_ANGLE3D:
        return AxisAngle3D()
    raise ValueError(f"unknown group kind {kind!r}")


def is_identity(g: GroupElement) -> bool:
    if isinstance(g, Rotation2D):
        return g.angle == 0.0
    if isinstance(g, Translation2D):
        return g.tx == 0 and g.ty == 0
    if isinstance(g, SquareSym):
        return g.rot == 0 and not g.reflect and not g.time_reverse
    return g.angle == 0.0


def _quat_from_element(g: AxisAngle3D) -> tuple[float, float, float, float]:
    return g.quaternion()


def _element_from_quat(w: float, x: float, y: float, z: float) -> AxisAngle3D:
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    vnorm = math.sqrt(x * x + y * y + z * z)
    angle = math.degrees(2.0 * math.atan2(vnorm, w))
    if vnorm < 1e-15 or angle < 1e-12:
        return AxisAngle3D()
    return AxisAngle3D(axis=(x / vnorm, y / vnorm, z / vnorm), angle=min(angle, 180.0))


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """a . b in canonical form (b acts first, then a)."""
    if type(a) is not type(b):
        raise KindMismatchError(f"cannot compose {kind_of(a)} with {kind_of(b)}")
    if isinstance(a, Rotation2D):
        return Rotation2D((a.angle + b.angle) % 360.0)
    if isinstance(a, Translation2D):
        return Translation2D(a.tx + b.tx, a.ty + b.ty)
    if isinstance(a, SquareSym):
        rot = (a.rot - b.rot) % 360 if a.reflect else (a.rot + b.rot) % 360
        return SquareSym(rot, a.reflect ^ b.reflect, a.time_reverse ^ b.time_reverse)
    # AxisAngle3D: quaternion product, exact when either side is the identity.
    if is_identity(a):
        return b
    if is_identity(b):
        return a
    w1, x1, y1, z1 = _quat_from_element(a)
    w2, x2, y2, z2 = _quat_from_element(b)
    return _element_from_quat(
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    )


def inverse(g: GroupElement) -> GroupElement:
    """The element undoing g: compose(g, inverse(g)) is the identity."""
    if isinstance(g, Rotation2D):
        return Rotation2D((-g.angle) % 360.0)
    if isinstance(g, Translation2D):
        return Translation2D(-g.tx, -g.ty)
    if isinstance(g, SquareSym):
        if g.reflect:
            return g
        return SquareSym((-g.rot) % 360, False, g.time_reverse)
    if is_identity(g):
        return g
    # Flip the axis direction instead of negating the angle, keeping angle in [0, 180].
    return AxisAngle3D(axis=(-g.axis[0], -g.axis[1], -g.axis[2]), angle=g.angle)


def rotation_matrix3d(g: AxisAngle3D):
    """3x3 rotation matrix via the Rodrigues formula."""
    import numpy as np

    k = np.asarray(g.axis, dtype=np.float64)
    th = math.radians(g.angle)
    kx = np.array(
        [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]], dtype=np.float64
    )
    return np.eye(3) + math.sin(th) * kx + (1.0 - math.cos(th)) * (kx @ kx)


def same_rotation(a: AxisAngle3D, b: AxisAngle3D, tol: float = 1e-9) -> bool:
    """Whether two axis-angle elements denote the same 3-D rotation.

    Needed because the parametrization is 2-to-1 at 180 degrees and the
    identity has arbitrary axis.
    """
    qa = a.quaternion()
    qb = b.quaternion()
    dot = abs(sum(pa * pb for pa, pb in zip(qa, qb)))
    return dot >= 1.0 - tol


# --- orbit discretization ---------------------------------------------------

LAYOUT_POLAR = "polar"
LAYOUT_CARTESIAN_GRID = "cartesian-grid"
LAYOUT_CELL_GRID = "cell-grid"
LAYOUT_TRIPLE_POLAR = "triple-polar"

# Horizontal offset between per-plane polar disks in the triple-polar layout.
_PLANE_SPACING = 2.5


@dataclass(frozen=True)
class OrbitSpec:
    """Discretization parameters for one group orbit.

    Defaults: 10 degree rotation steps, +/-64 px shifts at stride 8, and
    30 degree axis/rotation steps for the 3-D slicing planes.
    """

    kind: str
    rotation_step_deg: float = 10.0
    shift_extent: int = 64
    shift_stride: int = 8
    axis_angle_step_deg: float = 30.0
    rot_angle_step_deg: float = 30.0

    def validate(self) -> None:
        if self.kind not in GROUP_KINDS:
            raise InvalidSpecError(f"unknown group kind {self.kind!r}")
        if self.kind == ROTATION2D:
            step = self.rotation_step_deg
            if step <= 0:
                raise InvalidSpecError("rotation step must be positive")
            # Reject steps that do not divide 360: the orbit would not close
            # at the wrap point.
            if abs(360.0 / step - round(360.0 / step)) > 1e-9:
                raise InvalidSpecError(f"rotation step {step} does not divide 360")
        elif self.kind == TRANSLATION2D:
            if self.shift_extent <= 0 or self.shift_stride <= 0:
                raise InvalidSpecError("shift extent and stride must be positive")
            if self.shift_extent % self.shift_stride != 0:
                raise InvalidSpecError(
                    "shift extent must be a multiple of the stride so the grid "
                    "is symmetric and contains the identity"
                )
        elif self.kind == AXIS_ANGLE3D:
            astep, rstep = self.axis_angle_step_deg, self.rot_angle_step_deg
            if astep <= 0 or rstep <= 0:
                raise InvalidSpecError("axis/rotation angle steps must be positive")
            if abs(360.0 / astep - round(360.0 / astep)) > 1e-9:
                raise InvalidSpecError(f"axis angle step {astep} does not divide 360")
            if abs(180.0 / rstep - round(180.0 / rstep)) > 1e-9:
                raise InvalidSpecError(f"rotation angle step {rstep} does not divide 180")


@dataclass(frozen=True)
class Orbit:
    """A discretized orbit: ordered elements plus their 2-D plot coordinates."""

    kind: str
    elements: tuple[GroupElement, ...]
    layout: tuple[tuple[float, float], ...]
    layout_kind: str
    identity_index: int

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    @property
    def orbit_id(self) -> str:
        return f"{self.kind}-{len(self.elements)}"

    def radii_from_identity(self) -> list[float]:
        """Layout-space distance of each element from the identity's position."""
        ix, iy = self.layout[self.identity_index]
        return [math.hypot(x - ix, y - iy) for x, y in self.layout]


def _frange_count(stop: float, step: float) -> int:
    return int(round(stop / step))


def enumerate_orbit(spec: OrbitSpec) -> Orbit:
    """Deterministically enumerate the orbit described by ``spec``.

    Ordering: ascending angle for polar layouts; row-major (ty outer, tx
    inner, both ascending) for the shift grid; rotation-major over the
    (reflect, time-reverse) columns for square symmetries; plane-major, then
    axis angle, then rotation angle for the 3-D slices. Duplicate 3-D
    rotations (the shared identity, axes shared between planes, antipodal
    axes at 180 degrees) are kept at their first occurrence only.
    """
    spec.validate()
    elements: list[GroupElement] = []
    layout: list[tuple[float, float]] = []

    if spec.kind == ROTATION2D:
        n = _frange_count(360.0, spec.rotation_step_deg)
        for i in range(n):
            angle = i * spec.rotation_step_deg
            elements.append(Rotation2D(angle))
            rad = math.radians(angle)
            layout.append((math.cos(rad), math.sin(rad)))
        kind = LAYOUT_POLAR

    elif spec.kind == TRANSLATION2D:
        shifts = range(-spec.shift_extent, spec.shift_extent + 1, spec.shift_stride)
        for ty in shifts:
            for tx in shifts:
                elements.append(Translation2D(tx, ty))
                layout.append((float(tx), float(ty)))
        kind = LAYOUT_CARTESIAN_GRID

    elif spec.kind == SQUARE_SYM:
        for row, rot in enumerate((0, 90, 180, 270)):
            for col, (time_reverse, reflect) in enumerate(
                ((False, False), (False, True), (True, False), (True, True))
            ):
                elements.append(SquareSym(rot, reflect, time_reverse))
                layout.append((float(col), float(row)))
        kind = LAYOUT_CELL_GRID

    else:  # AXIS_ANGLE3D
        n_axis = _frange_count(360.0, spec.axis_angle_step_deg)
        n_rot = _frange_count(180.0, spec.rot_angle_step_deg) + 1
        seen: list[AxisAngle3D] = []
        for plane_idx, plane in enumerate(PLANES):
            cx = plane_idx * _PLANE_SPACING
            for i in range(n_axis):
                axis_angle = i * spec.axis_angle_step_deg
                for j in range(n_rot):
                    rot_angle = j * spec.rot_angle_step_deg
                    g = AxisAngle3D.from_plane(plane, axis_angle, rot_angle)
                    if any(same_rotation(g, h) for h in seen):
                        continue
                    seen.append(g)
                    elements.append(g)
                    r = rot_angle / 180.0
                    a = math.radians(axis_angle)
                    layout.append((cx + r * math.cos(a), r * math.sin(a)))
        kind = LAYOUT_TRIPLE_POLAR

    ident = identity(spec.kind)
    identity_index = next(i for i, g in enumerate(elements) if g == ident)
    return Orbit(
        kind=spec.kind,
        elements=tuple(elements),
        layout=tuple(layout),
        layout_kind=kind,
        identity_index=identity_index,
    )
