import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abstractpose.env import CameraIntrinsics
from abstractpose.errors import BehindCameraError, DegenerateHullError
from abstractpose.geometry import SUBPIXEL, convex_hull, fill_convex, project_points

from oracles import hull_vertices_bruteforce, point_in_polygon

K = CameraIntrinsics(280.0, (128.0, 128.0), (256, 256))


def test_optical_axis_hits_principal_point():
    np.testing.assert_array_equal(project_points([[0, 0, 750.0]], K), [[128.0, 128.0]])


def test_direct_formula():
    np.testing.assert_allclose(project_points([[100.0, 0, 1000.0]], K), [[156.0, 128.0]])


def test_doubling_depth_halves_offset():
    p = np.array([[123.0, -45.0, 800.0]])
    a = project_points(p, K) - 128.0
    b = project_points(p * [1, 1, 2], K) - 128.0
    np.testing.assert_allclose(b, a / 2)


def test_points_behind_camera():
    with pytest.raises(BehindCameraError):
        project_points([[0, 0, 1.0]], K)
    with pytest.raises(BehindCameraError):
        project_points([[0, 0, 100.0], [0, 0, -5.0]], K)


def test_square_with_centre():
    pts = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 1)]
    h = convex_hull(pts)
    assert {tuple(p) for p in h} == {(0, 0), (2, 0), (2, 2), (0, 2)}


def _signed_area(h):
    x, y = np.asarray(h, float).T
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def test_hull_is_counter_clockwise_and_drops_collinear():
    pts = [(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)]
    h = convex_hull(pts)
    assert _signed_area(h) > 0
    assert (1, 0) not in {tuple(p) for p in h}


def test_collinear_points_are_degenerate():
    with pytest.raises(DegenerateHullError):
        convex_hull([(0, 0), (1, 1), (3, 3), (2, 2)])
    with pytest.raises(DegenerateHullError):
        convex_hull([(0, 0), (0, 0), (1, 1)])


@pytest.mark.parametrize("coords", ["float", "int"])
def test_hull_matches_bruteforce(coords):
    rng = np.random.default_rng(42 if coords == "float" else 43)
    for _ in range(1000):
        if coords == "float":
            pts = rng.uniform(-100, 100, (20, 2))
        else:
            # small integer grid -> many duplicates and collinear triples
            pts = rng.integers(0, 8, (20, 2))
        try:
            h = convex_hull(pts)
        except DegenerateHullError:
            continue
        assert {tuple(p) for p in h.tolist()} == hull_vertices_bruteforce(pts)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=30))
def test_hull_idempotent(pts):
    try:
        h = convex_hull(pts)
    except DegenerateHullError:
        return
    np.testing.assert_array_equal(convex_hull(h), h)


def test_fill_matches_point_in_polygon():
    rng = np.random.default_rng(7)
    for _ in range(200):
        pts = rng.integers(-4 * SUBPIXEL, 36 * SUBPIXEL, (8, 2))
        try:
            poly = convex_hull(pts)
        except DegenerateHullError:
            continue
        mask = np.zeros((32, 32), bool)
        fill_convex(mask, poly)
        ref = np.zeros_like(mask)
        half = SUBPIXEL // 2
        for r in range(32):
            for c in range(32):
                ref[r, c] = point_in_polygon(c * SUBPIXEL + half, r * SUBPIXEL + half, poly.tolist())
        np.testing.assert_array_equal(mask, ref)


def test_pixel_on_edges_follows_top_left_rule():
    # axis-aligned square whose edges pass exactly through pixel centres 1 and 3
    S, h = SUBPIXEL, SUBPIXEL // 2
    poly = [(1 * S + h, 1 * S + h), (3 * S + h, 1 * S + h), (3 * S + h, 3 * S + h), (1 * S + h, 3 * S + h)]
    mask = np.zeros((5, 5), bool)
    fill_convex(mask, poly)
    expected = np.zeros((5, 5), bool)
    expected[1:3, 1:3] = True  # top and left edges in, bottom and right out
    np.testing.assert_array_equal(mask, expected)
