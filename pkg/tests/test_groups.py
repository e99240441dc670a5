import itertools
import math

import numpy as np
import pytest

from nero.groups import (
    AxisAngle3D,
    InvalidSpecError,
    KindMismatchError,
    OrbitSpec,
    Rotation2D,
    SquareSym,
    Translation2D,
    compose,
    enumerate_orbit,
    identity,
    inverse,
    is_identity,
    kind_of,
    rotation_matrix3d,
    same_rotation,
)

ALL_SQUARE_SYMS = [
    SquareSym(rot, reflect, tr)
    for rot in (0, 90, 180, 270)
    for reflect in (False, True)
    for tr in (False, True)
]


def random_element(kind, rng):
    if kind == "rotation2d":
        # grid angles (multiples of 0.5 degree) keep float degree arithmetic exact
        return Rotation2D(int(rng.integers(0, 720)) / 2.0)
    if kind == "translation2d":
        return Translation2D(int(rng.integers(-100, 101)), int(rng.integers(-100, 101)))
    if kind == "square_sym":
        return SquareSym(
            int(rng.choice([0, 90, 180, 270])), bool(rng.integers(2)), bool(rng.integers(2))
        )
    axis = rng.normal(size=3)
    return AxisAngle3D(axis=tuple(axis / np.linalg.norm(axis)), angle=rng.uniform(0, 180))


def test_compose_square_sym_rotations():
    assert compose(SquareSym(90), SquareSym(90)) == SquareSym(180)


def test_compose_translation_inverse_pair():
    assert compose(Translation2D(3, 4), Translation2D(-3, -4)) == Translation2D(0, 0)


def test_compose_rotation_wraps():
    assert compose(Rotation2D(350), Rotation2D(20)) == Rotation2D(10)


def test_compose_kind_mismatch():
    with pytest.raises(KindMismatchError):
        compose(Rotation2D(10), Translation2D(1, 1))


def test_inverse_rotation():
    assert inverse(Rotation2D(90)) == Rotation2D(270)


def test_inverse_reflection_is_involution():
    g = SquareSym(0, reflect=True)
    assert inverse(g) == g
    for g in ALL_SQUARE_SYMS:
        if g.reflect:
            assert inverse(g) == g


def test_inverse_axis_angle_flips_axis():
    g = AxisAngle3D.from_plane("XY", 30, 45)
    gi = inverse(g)
    plane, axis_angle = gi.plane_form()
    assert plane == "XY"
    assert axis_angle == pytest.approx(210.0)
    assert gi.angle == pytest.approx(45.0)
    # independent check: the rotation matrices multiply to the identity
    assert np.allclose(rotation_matrix3d(g) @ rotation_matrix3d(gi), np.eye(3), atol=1e-12)


def test_identity_elements():
    assert identity("rotation2d") == Rotation2D(0)
    assert identity("translation2d") == Translation2D(0, 0)
    assert identity("square_sym") == SquareSym(0, False, False)
    for kind in ("rotation2d", "translation2d", "square_sym", "axis_angle3d"):
        assert is_identity(identity(kind))


def test_kind_of():
    assert kind_of(Rotation2D(5)) == "rotation2d"
    assert kind_of(AxisAngle3D()) == "axis_angle3d"
    with pytest.raises(TypeError):
        kind_of("not an element")


def test_square_sym_table_closed_over_16_elements():
    # brute-force composition table: closure and group axioms on the full group
    assert len(set(ALL_SQUARE_SYMS)) == 16
    table = {}
    for a, b in itertools.product(ALL_SQUARE_SYMS, repeat=2):
        c = compose(a, b)
        assert c in ALL_SQUARE_SYMS
        table[(a, b)] = c
    e = identity("square_sym")
    for g in ALL_SQUARE_SYMS:
        assert table[(e, g)] == g
        assert table[(g, e)] == g
        assert table[(g, inverse(g))] == e
        assert table[(inverse(g), g)] == e
    # each row/column of the table is a permutation (Latin square)
    for a in ALL_SQUARE_SYMS:
        assert len({table[(a, b)] for b in ALL_SQUARE_SYMS}) == 16
        assert len({table[(b, a)] for b in ALL_SQUARE_SYMS}) == 16


@pytest.mark.parametrize("kind", ["rotation2d", "translation2d", "square_sym"])
def test_exact_group_axioms_random_triples(kind):
    rng = np.random.default_rng(7)
    e = identity(kind)
    for _ in range(200):
        a, b, c = (random_element(kind, rng) for _ in range(3))
        assert compose(compose(a, b), c) == compose(a, compose(b, c))
        assert compose(e, a) == a
        assert compose(a, e) == a
        assert compose(a, inverse(a)) == e


def test_axis_angle_axioms_random_triples():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a, b, c = (random_element("axis_angle3d", rng) for _ in range(3))
        left = compose(compose(a, b), c)
        right = compose(a, compose(b, c))
        assert same_rotation(left, right, tol=1e-9)
        # matrix-level agreement with the matrix product oracle
        ref = rotation_matrix3d(a) @ rotation_matrix3d(b)
        assert np.allclose(rotation_matrix3d(compose(a, b)), ref, atol=1e-9)
        assert np.allclose(
            rotation_matrix3d(compose(a, inverse(a))), np.eye(3), atol=1e-9
        )
        assert is_identity(compose(a, inverse(a)))


def test_enumerate_square_sym_orbit_has_16_elements():
    orbit = enumerate_orbit(OrbitSpec(kind="square_sym"))
    assert len(orbit) == 16
    assert len(set(orbit.elements)) == 16
    assert orbit.layout_kind == "cell-grid"
    assert orbit.elements[orbit.identity_index] == identity("square_sym")
    # 4x4 cell grid coordinates
    assert set(orbit.layout) == {(float(c), float(r)) for c in range(4) for r in range(4)}


def test_enumerate_rotation_orbit_step_90():
    orbit = enumerate_orbit(OrbitSpec(kind="rotation2d", rotation_step_deg=90))
    assert [g.angle for g in orbit] == [0, 90, 180, 270]
    assert orbit.identity_index == 0
    expected = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    for (x, y), (ex, ey) in zip(orbit.layout, expected):
        assert x == pytest.approx(ex, abs=1e-12)
        assert y == pytest.approx(ey, abs=1e-12)


def test_enumerate_translation_orbit_extent_equals_stride():
    orbit = enumerate_orbit(OrbitSpec(kind="translation2d", shift_extent=64, shift_stride=64))
    # oracle: enumerate the expected grid directly
    expected = [(tx, ty) for ty in (-64, 0, 64) for tx in (-64, 0, 64)]
    assert [(g.tx, g.ty) for g in orbit.elements] == expected
    assert len(orbit) == 9
    assert orbit.elements[orbit.identity_index] == Translation2D(0, 0)


def test_translation_orbit_closed_under_in_range_compose():
    spec = OrbitSpec(kind="translation2d", shift_extent=16, shift_stride=8)
    orbit = enumerate_orbit(spec)
    members = set(orbit.elements)
    for a, b in itertools.product(orbit.elements, repeat=2):
        c = compose(a, b)
        if abs(c.tx) <= 16 and abs(c.ty) <= 16:
            assert c in members


def test_enumerate_orbit_is_pure():
    spec = OrbitSpec(kind="axis_angle3d")
    a = enumerate_orbit(spec)
    b = enumerate_orbit(spec)
    assert a == b


def test_axis_angle_orbit_elements_distinct_and_layout_injective():
    orbit = enumerate_orbit(OrbitSpec(kind="axis_angle3d"))
    assert orbit.layout_kind == "triple-polar"
    for i, gi in enumerate(orbit.elements):
        for j in range(i + 1, len(orbit)):
            assert not same_rotation(gi, orbit.elements[j])
    assert len(set(orbit.layout)) == len(orbit)
    assert is_identity(orbit.elements[orbit.identity_index])


def test_layout_coordinates_injective_all_kinds():
    for spec in (
        OrbitSpec(kind="rotation2d", rotation_step_deg=30),
        OrbitSpec(kind="translation2d", shift_extent=32, shift_stride=16),
        OrbitSpec(kind="square_sym"),
    ):
        orbit = enumerate_orbit(spec)
        assert len(set(orbit.layout)) == len(orbit)
        assert len(set(orbit.elements)) == len(orbit)


def test_invalid_specs_rejected():
    with pytest.raises(InvalidSpecError):
        enumerate_orbit(OrbitSpec(kind="rotation2d", rotation_step_deg=7))
    with pytest.raises(InvalidSpecError):
        enumerate_orbit(OrbitSpec(kind="rotation2d", rotation_step_deg=-10))
    with pytest.raises(InvalidSpecError):
        enumerate_orbit(OrbitSpec(kind="translation2d", shift_extent=10, shift_stride=4))
    with pytest.raises(InvalidSpecError):
        enumerate_orbit(OrbitSpec(kind="axis_angle3d", rot_angle_step_deg=50))
    with pytest.raises(InvalidSpecError):
        enumerate_orbit(OrbitSpec(kind="nonsense"))


def test_radii_from_identity():
    orbit = enumerate_orbit(OrbitSpec(kind="translation2d", shift_extent=8, shift_stride=8))
    radii = orbit.radii_from_identity()
    assert radii[orbit.identity_index] == 0.0
    assert max(radii) == pytest.approx(math.hypot(8, 8))
