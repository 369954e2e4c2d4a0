"""Pinhole projection, 2D convex hulls and exact convex-polygon scan conversion.

Polygons are rasterised on a fixed-point sub-pixel grid (``SUBPIXEL`` steps
per pixel).  Vertex coordinates are snapped to integers on that grid, so
every inside/outside decision below is made in exact integer arithmetic.

Fill rule: pixel (row r, col c) is inside when its centre
``(c + 1/2, r + 1/2)`` is inside the polygon, with half-open edges -- points
on a left or top edge are in, points on a right or bottom edge are out.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .env import CameraIntrinsics
from .errors import BehindCameraError, DegenerateHullError

SUBPIXEL = 256
MIN_DEPTH = 1.0  # mm


def project_points(points: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Project camera-frame points (K, 3) to pixel coordinates (K, 2)."""
    pts = np.asarray(points, dtype=float)
    z = pts[:, 2]
    if np.any(z <= MIN_DEPTH):
        raise BehindCameraError(f"{int(np.sum(z <= MIN_DEPTH))} point(s) at or behind the camera")
    f = intrinsics.focal_length
    cx, cy = intrinsics.principal_point
    return np.column_stack([f * pts[:, 0] / z + cx, f * pts[:, 1] / z + cy])


def snap(points_px: np.ndarray) -> np.ndarray:
    """Pixel coordinates -> integer sub-pixel grid."""
    return np.rint(np.asarray(points_px, float) * SUBPIXEL).astype(np.int64)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain.

    Returns the hull vertices in counter-clockwise order (positive signed area
    in the given coordinates), starting from the lexicographically smallest
    point, with collinear boundary points dropped.  Raises
    ``DegenerateHullError`` when the points span no area.
    """
    pts = sorted(set(map(tuple, np.asarray(points).tolist())))
    if len(pts) < 3:
        raise DegenerateHullError(f"{len(pts)} distinct point(s)")

    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHullError("all points are collinear")
    return np.array(hull, dtype=np.asarray(points).dtype)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def polygon_spans(poly, height: int, width: int):
    """Yield ``(row, col_start, col_stop)`` for every non-empty row of a convex polygon.

    ``poly`` holds integer sub-pixel vertices (any winding).  Spans are clipped
    to the image.
    """
    poly = [(int(x), int(y)) for x, y in poly]
    n = len(poly)
    edges = []
    for k in range(n):
        (x0, y0), (x1, y1) = poly[k], poly[(k + 1) % n]
        if y0 == y1:
            continue
        if y0 > y1:
            x0, y0, x1, y1 = x1, y1, x0, y0
        edges.append((x0, y0, x1, y1))
    if not edges:
        return
    ymin = min(e[1] for e in edges)
    ymax = max(e[3] for e in edges)
    half = SUBPIXEL // 2
    r0 = max(0, _ceil_div(ymin - half, SUBPIXEL))
    r1 = min(height, _ceil_div(ymax - half, SUBPIXEL))
    for r in range(r0, r1):
        py = r * SUBPIXEL + half
        # x crossings as exact rationals num/den, den > 0
        cuts = []
        for x0, y0, x1, y1 in edges:
            if y0 <= py < y1:
                den = y1 - y0
                cuts.append((x0 * den + (py - y0) * (x1 - x0), den))
        if len(cuts) < 2:
            continue
        # a convex polygon has exactly two crossings per scanline
        cuts.sort(key=lambda c: Fraction(*c))
        (na, da), (nb, db) = cuts[0], cuts[-1]
        # first/last column whose centre c*S + S/2 satisfies  left <= centre < right
        c0 = _ceil_div(na - half * da, SUBPIXEL * da)
        c1 = _ceil_div(nb - half * db, SUBPIXEL * db)
        c0, c1 = max(c0, 0), min(c1, width)
        if c0 < c1:
            yield r, c0, c1


def fill_convex(mask: np.ndarray, poly) -> None:
    """Set ``mask`` True inside the polygon (in place)."""
    h, w = mask.shape
    for r, c0, c1 in polygon_spans(poly, h, w):
        mask[r, c0:c1] = True


def draw_segment(mask: np.ndarray, p0, p1) -> None:
    """1-px Bresenham segment between two sub-pixel points (used for hulls with no area)."""
    h, w = mask.shape
    x0, y0 = (int(v) // SUBPIXEL for v in p0)
    x1, y1 = (int(v) // SUBPIXEL for v in p1)
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx, sy = (1 if x0 < x1 else -1), (1 if y0 < y1 else -1)
    err = dx + dy
    while True:
        if 0 <= y0 < h and 0 <= x0 < w:
            mask[y0, x0] = True
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
