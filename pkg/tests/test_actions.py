import numpy as np
import pytest

from nero.actions import (
    ActionContext,
    ActionError,
    BBox,
    ClassLabel,
    ClassProbs,
    Detection,
    Detections,
    FlowField,
    ImagePairSample,
    ImageSample,
    PointCloudSample,
    act_input,
    act_output,
    act_output_inverse,
    crop,
    output_element,
    rotate_image,
    square_sym_array,
    square_sym_matrix,
)
from nero.groups import (
    AxisAngle3D,
    Rotation2D,
    SquareSym,
    Translation2D,
    compose,
    identity,
    inverse,
)


def smooth_image(h=28, w=28, seed=3):
    # sum of gaussian blobs: smooth enough for resampling tolerance checks
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:h, 0:w]
    img = np.zeros((h, w), dtype=np.float64)
    for _ in range(4):
        cy, cx = rng.uniform(h * 0.25, h * 0.75), rng.uniform(w * 0.25, w * 0.75)
        sig = rng.uniform(2.0, 4.0)
        img += np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * sig**2))
    img /= img.max()
    return img.astype(np.float32)[:, :, None]


# --- type invariants ---


def test_image_pair_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        ImagePairSample("s", np.zeros((4, 4)), np.zeros((4, 5)))


def test_point_cloud_nonfinite_rejected():
    pts = np.zeros((3, 3))
    pts[1, 1] = np.nan
    with pytest.raises(ValueError):
        PointCloudSample("s", pts)


def test_class_probs_simplex_enforced():
    with pytest.raises(ValueError):
        ClassProbs(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        ClassProbs(np.array([1.1, -0.1]))
    ClassProbs(np.array([0.25, 0.75]))


def test_bbox_ordering_enforced():
    with pytest.raises(ValueError):
        BBox(5, 0, 5, 10)
    with pytest.raises(ValueError):
        BBox(0, 10, 5, 10)


def test_label_range_enforced():
    with pytest.raises(ValueError):
        ClassLabel(10, 10)


# --- act_input ---


def test_identity_is_bit_exact():
    img = ImageSample("s", smooth_image())
    assert act_input(identity("rotation2d"), img) is img
    pair = ImagePairSample("s", np.ones((4, 4)), np.zeros((4, 4)))
    assert act_input(identity("square_sym"), pair) is pair


def test_rotation_180_is_exact_permutation():
    img = ImageSample("s", np.array([[1.0, 2.0], [3.0, 4.0]]))
    out = act_input(Rotation2D(180), img)
    assert np.array_equal(out.pixels[:, :, 0], [[4.0, 3.0], [2.0, 1.0]])


def test_rotation_90_multiples_are_exact_permutations():
    img = smooth_image(8, 8)
    by_90 = rotate_image(img, 90.0)
    assert np.array_equal(by_90, np.rot90(img, 1))
    assert np.array_equal(rotate_image(img, 270.0), np.rot90(img, 3))


def test_rotation_double_step_tolerance():
    # double application of theta vs single application of 2*theta
    img = smooth_image()
    for theta in (15.0, 33.0, 70.0):
        twice = rotate_image(rotate_image(img, theta), theta)
        once = rotate_image(img, 2 * theta)
        assert np.abs(twice - once).mean() < 0.02


def test_translation_marked_pixel_sign_convention():
    # oracle by direct index arithmetic: window moves +tx, object moves -tx
    source = np.zeros((32, 32), dtype=np.float32)
    source[16, 16] = 1.0
    x = ImageSample("s", crop(source, (8, 8), (16, 16)))
    assert x.pixels[8, 8, 0] == 1.0
    ctx = ActionContext(source=source, window_origin=(8, 8))
    out = act_input(Translation2D(5, 0), x, ctx)
    assert out.pixels[8, 8 - 5, 0] == 1.0
    assert out.pixels.sum() == 1.0
    out = act_input(Translation2D(0, -3), x, ctx)
    assert out.pixels[8 + 3, 8, 0] == 1.0


def test_translation_action_law_bit_exact():
    rng = np.random.default_rng(5)
    source = rng.random((64, 64)).astype(np.float32)
    x = ImageSample("s", crop(source, (20, 20), (16, 16)))
    ctx = ActionContext(source=source, window_origin=(20, 20))
    g, h = Translation2D(3, -2), Translation2D(-5, 7)
    inner = act_input(h, x, ctx)
    # applying g to the h-shifted crop re-crops from the same source
    ctx_inner = ActionContext(source=source, window_origin=(20 + h.tx, 20 + h.ty))
    left = act_input(g, inner, ctx_inner)
    right = act_input(compose(g, h), x, ctx)
    assert np.array_equal(left.pixels, right.pixels)


def test_translation_out_of_bounds_window():
    source = np.zeros((32, 32), dtype=np.float32)
    x = ImageSample("s", crop(source, (8, 8), (16, 16)))
    ctx = ActionContext(source=source, window_origin=(8, 8))
    with pytest.raises(ActionError):
        act_input(Translation2D(9, 0), x, ctx)


def test_square_sym_action_law_bit_exact():
    rng = np.random.default_rng(6)
    pair = ImagePairSample("s", rng.random((8, 8)), rng.random((8, 8)))
    elements = [
        SquareSym(rot, refl, tr)
        for rot in (0, 90, 180, 270)
        for refl in (False, True)
        for tr in (False, True)
    ]
    for g in elements:
        for h in elements:
            left = act_input(g, act_input(h, pair))
            right = act_input(compose(g, h), pair)
            assert np.array_equal(left.frame_a, right.frame_a)
            assert np.array_equal(left.frame_b, right.frame_b)


def test_square_sym_matrix_matches_array_permutation():
    # the 2x2 matrix and the pixel permutation must describe the same map
    for rot in (0, 90, 180, 270):
        for refl in (False, True):
            g = SquareSym(rot, refl)
            m = square_sym_matrix(g)
            n = 5
            grid = np.zeros((n, n), dtype=np.float64)
            grid[1, 4] = 1.0  # centered coords: x = 4-2 = 2, y = 2-1 = 1
            moved = square_sym_array(grid, g)
            (r,), (c,) = np.nonzero(moved)[0], np.nonzero(moved)[1]
            x, y = c - 2.0, 2.0 - r
            ex, ey = m @ np.array([2.0, 1.0])
            assert (x, y) == (pytest.approx(ex), pytest.approx(ey))


def test_time_reverse_swaps_frames():
    a, b = np.ones((4, 4), dtype=np.float32), np.zeros((4, 4), dtype=np.float32)
    pair = ImagePairSample("s", a, b)
    out = act_input(SquareSym(0, False, True), pair)
    assert np.array_equal(out.frame_a, b[:, :, None])
    assert np.array_equal(out.frame_b, a[:, :, None])


def test_point_cloud_action_preserves_distances():
    rng = np.random.default_rng(8)
    pts = rng.random((40, 3))
    x = PointCloudSample("s", pts)
    g = AxisAngle3D.from_plane("XZ", 72.0, 105.0)
    out = act_input(g, x)
    d_in = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    d_out = np.linalg.norm(out.points[:, None] - out.points[None, :], axis=-1)
    assert np.allclose(d_out, d_in, rtol=1e-9, atol=1e-12)


def test_point_cloud_action_law():
    rng = np.random.default_rng(9)
    x = PointCloudSample("s", rng.random((25, 3)))
    g = AxisAngle3D.from_plane("XY", 30.0, 45.0)
    h = AxisAngle3D.from_plane("YZ", 120.0, 160.0)
    left = act_input(g, act_input(h, x))
    right = act_input(compose(g, h), x)
    assert np.allclose(left.points, right.points, atol=1e-9)


def test_act_input_kind_mismatch():
    img = ImageSample("s", np.zeros((4, 4)))
    with pytest.raises(ActionError):
        act_input(SquareSym(90), img)
    with pytest.raises(ActionError):
        act_input(AxisAngle3D.from_plane("XY", 0, 90), img)


# --- act_output ---


def test_bbox_translation_component_wise():
    out = act_output(Translation2D(3, -4), BBox(10, 10, 20, 20))
    assert out == BBox(13, 6, 23, 16)


def test_bbox_translation_round_trip():
    g = Translation2D(3, -4)
    assert act_output_inverse(g, BBox(13, 6, 23, 16)) == BBox(10, 10, 20, 20)


def test_class_probs_invariant_under_everything():
    p = ClassProbs(np.array([0.2, 0.5, 0.3]))
    assert act_output(Rotation2D(123.0), p) is p
    assert act_output(AxisAngle3D.from_plane("XY", 10, 20), p) is p
    assert act_output_inverse(Rotation2D(45), p) is p


def test_uniform_rightward_flow_rotates_to_upward():
    field = np.zeros((4, 4, 2), dtype=np.float32)
    field[:, :, 0] = 1.0  # rightward
    out = act_output(SquareSym(90), FlowField(field))
    assert np.allclose(out.vectors[:, :, 0], 0.0)
    assert np.allclose(out.vectors[:, :, 1], 1.0)  # upward


def test_time_reverse_negates_flow():
    rng = np.random.default_rng(10)
    f = FlowField(rng.standard_normal((4, 4, 2)).astype(np.float32))
    out = act_output(SquareSym(0, False, True), f)
    assert np.array_equal(out.vectors, -f.vectors)


def test_flow_round_trip_identity():
    rng = np.random.default_rng(11)
    f = FlowField(rng.standard_normal((6, 6, 2)).astype(np.float32))
    for rot in (0, 90, 180, 270):
        for refl in (False, True):
            for tr in (False, True):
                g = SquareSym(rot, refl, tr)
                back = act_output_inverse(g, act_output(g, f))
                assert np.allclose(back.vectors, f.vectors, atol=1e-6)


def test_flow_action_composition():
    rng = np.random.default_rng(12)
    f = FlowField(rng.standard_normal((6, 6, 2)).astype(np.float32))
    g, h = SquareSym(90, True, False), SquareSym(270, False, True)
    left = act_output(g, act_output(h, f))
    right = act_output(compose(g, h), f)
    assert np.allclose(left.vectors, right.vectors, atol=1e-6)


def test_detections_translate_with_boxes():
    d = Detections((Detection(BBox(0, 0, 4, 4), 0.9), Detection(BBox(2, 2, 6, 6), 0.5)))
    out = act_output(Translation2D(1, 1), d)
    assert out.items[0].box == BBox(1, 1, 5, 5)
    assert out.items[1].confidence == 0.5


def test_act_output_kind_mismatch():
    with pytest.raises(ActionError):
        act_output(Rotation2D(90), BBox(0, 0, 1, 1))
    with pytest.raises(ActionError):
        act_output(Translation2D(1, 0), FlowField(np.zeros((2, 2, 2))))


def test_output_element_convention():
    g = Translation2D(5, -3)
    assert output_element(g) == inverse(g)
    s = SquareSym(90, True, False)
    assert output_element(s) == s
    # chain check: the object in the shifted crop sits where the transformed
    # ground truth says it is
    source = np.zeros((64, 64), dtype=np.float32)
    source[30:34, 20:24] = 1.0  # object occupies x [20,24), y [30,34)
    window_origin = (12, 22)
    x = ImageSample("s", crop(source, window_origin, (32, 32)))
    y = BBox(20 - 12, 30 - 22, 24 - 12, 34 - 22)
    g = Translation2D(4, -6)
    ctx = ActionContext(source=source, window_origin=window_origin)
    moved = act_input(g, x, ctx)
    y_moved = act_output(output_element(g), y)
    ys, xs = np.nonzero(moved.pixels[:, :, 0])
    assert (xs.min(), ys.min(), xs.max() + 1, ys.max() + 1) == (
        y_moved.xmin,
        y_moved.ymin,
        y_moved.xmax,
        y_moved.ymax,
    )
