"""Polygon operations: area, containment, rasterization, clipping, IoU.

Everything is a pure function over the immutable types in types.py.
IoU is raster-based (even-odd fill, supersampled majority per pixel) so
concave and self-intersecting polygons are handled uniformly; the exact
convex clip is kept as an independent oracle for tests.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from ..errors import DegeneratePolygon, NotConvex, SingularTransform
from . import backend
from .types import AffineTransform, GridSpec, PixelRect, Point, Polygon, RasterMask, shoelace

Region = Union[Polygon, RasterMask]


def polygon_area(poly: Polygon) -> float:
    """Absolute shoelace area in square pixels."""
    return poly.area


def point_in_polygon(pt: Point, poly: Polygon) -> bool:
    """Even-odd containment; points exactly on an edge count as inside."""
    x, y = pt
    verts = poly.vertices
    n = len(verts)
    inside = False
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        cross = (x2 - x1) * (y - y1) - (x - x1) * (y2 - y1)
        if (cross == 0.0
                and min(x1, x2) <= x <= max(x1, x2)
                and min(y1, y2) <= y <= max(y1, y2)):
            return True
        if (y1 > y) != (y2 > y):
            t = (y - y1) / (y2 - y1)
            if x < x1 + t * (x2 - x1):
                inside = not inside
    return inside


def sample_counts(poly: Polygon, grid: GridSpec) -> np.ndarray:
    """Per-pixel count of inside sample points (supersample^2 per pixel)."""
    xs, ys = poly.coords()
    return backend.pixel_counts(xs, ys, grid.width, grid.height, grid.supersample)


def rasterize(poly: Polygon, grid: GridSpec) -> RasterMask:
    """Bit set iff a strict majority of the pixel's sample points are inside.

    With an odd supersample (default 3) ties are impossible.
    """
    counts = sample_counts(poly, grid)
    s2 = grid.supersample * grid.supersample
    return RasterMask(counts * 2 > s2)


def _as_mask(region: Region, grid: GridSpec) -> RasterMask:
    if isinstance(region, RasterMask):
        region.require_grid(grid)
        return region
    return rasterize(region, grid)


def iou(a: Region, b: Region, grid: GridSpec) -> float:
    """popcount(A & B) / popcount(A | B); 0.0 when the union is empty."""
    ma = _as_mask(a, grid)
    mb = _as_mask(b, grid)
    inter = int(np.count_nonzero(ma.bits & mb.bits))
    union = int(np.count_nonzero(ma.bits | mb.bits))
    return inter / union if union else 0.0


def bbox_iou(a: Polygon, b: Polygon) -> float:
    """Axis-aligned bounding-box IoU, a cheap derived convenience."""
    ax0, ay0, ax1, ay1 = a.bbox()
    bx0, by0, bx1, by1 = b.bbox()
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


def transform_polygon(poly: Polygon, t: AffineTransform) -> Polygon:
    if t.det == 0:
        raise SingularTransform("determinant is zero")
    return Polygon.from_points([t.apply(x, y) for x, y in poly.vertices])


# --- clipping ---------------------------------------------------------------

def _clip_half_plane(points: list[Point], axis: int, bound: float, keep_ge: bool) -> list[Point]:
    """Sutherland-Hodgman step against an axis-aligned half-plane.

    Intersection points get the clipped coordinate set to `bound` exactly, so
    results never drift outside the rectangle.
    """
    if not points:
        return []
    out: list[Point] = []
    s = points[-1]
    for e in points:
        s_in = (s[axis] >= bound) if keep_ge else (s[axis] <= bound)
        e_in = (e[axis] >= bound) if keep_ge else (e[axis] <= bound)
        if e_in != s_in:
            t = (bound - s[axis]) / (e[axis] - s[axis])
            if axis == 0:
                cut = (bound, s[1] + t * (e[1] - s[1]))
            else:
                cut = (s[0] + t * (e[0] - s[0]), bound)
            out.append(cut)
        if e_in:
            out.append(e)
        s = e
    return out


def clip_polygon_to_rect(poly: Polygon, rect: PixelRect) -> Polygon | None:
    """Clip against the four rectangle half-planes; None when no area survives."""
    pts = list(poly.vertices)
    pts = _clip_half_plane(pts, 0, rect.x0, keep_ge=True)
    pts = _clip_half_plane(pts, 0, rect.x1, keep_ge=False)
    pts = _clip_half_plane(pts, 1, rect.y0, keep_ge=True)
    pts = _clip_half_plane(pts, 1, rect.y1, keep_ge=False)
    try:
        return Polygon.from_points(pts)
    except DegeneratePolygon:
        return None


def _is_convex(poly: Polygon) -> bool:
    verts = poly.vertices
    n = len(verts)
    sign = 0
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cx, cy = verts[(i + 2) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if cross != 0:
            s = 1 if cross > 0 else -1
            if sign == 0:
                sign = s
            elif s != sign:
                return False
    return sign != 0


def convex_intersection_area(a: Polygon, b: Polygon) -> float:
    """Exact intersection area of two convex polygons (clip + shoelace).

    Test oracle for the rasterized IoU; raises NotConvex on concave input.
    """
    if not _is_convex(a):
        raise NotConvex("first polygon is not convex")
    if not _is_convex(b):
        raise NotConvex("second polygon is not convex")

    clip = list(b.vertices)
    if shoelace(clip) < 0:
        clip.reverse()

    out = list(a.vertices)
    for i in range(len(clip)):
        if not out:
            return 0.0
        c1 = clip[i]
        c2 = clip[(i + 1) % len(clip)]
        ex, ey = c2[0] - c1[0], c2[1] - c1[1]

        def inside(p: Point) -> bool:
            return ex * (p[1] - c1[1]) - ey * (p[0] - c1[0]) >= 0

        nxt: list[Point] = []
        s = out[-1]
        for e in out:
            if inside(e):
                if not inside(s):
                    nxt.append(_line_intersection(s, e, c1, c2))
                nxt.append(e)
            elif inside(s):
                nxt.append(_line_intersection(s, e, c1, c2))
            s = e
        out = nxt
    if len(out) < 3:
        return 0.0
    return abs(shoelace(out)) / 2.0


def _line_intersection(s: Point, e: Point, c1: Point, c2: Point) -> Point:
    dcx, dcy = c1[0] - c2[0], c1[1] - c2[1]
    dpx, dpy = s[0] - e[0], s[1] - e[1]
    n1 = c1[0] * c2[1] - c1[1] * c2[0]
    n2 = s[0] * e[1] - s[1] * e[0]
    n3 = dcx * dpy - dcy * dpx
    return ((n1 * dpx - n2 * dcx) / n3, (n1 * dpy - n2 * dcy) / n3)


def raster_area(poly: Polygon, grid: GridSpec) -> float:
    """Area estimate from the majority mask (popcount in square pixels)."""
    return float(rasterize(poly, grid).popcount())


def clamp_point_to_rect(pt: Point, rect: PixelRect) -> Point:
    return (min(max(pt[0], rect.x0), rect.x1), min(max(pt[1], rect.y0), rect.y1))


def mask_bounding_polygon(mask: RasterMask) -> Polygon:
    """Tight axis-aligned rectangle around the set bits of a mask.

    Used when a mask-based prediction must become an editable polygon
    annotation; the original mask stays authoritative for IoU.
    """
    rows = np.nonzero(mask.bits.any(axis=1))[0]
    cols = np.nonzero(mask.bits.any(axis=0))[0]
    if rows.size == 0:
        raise DegeneratePolygon("mask has no set bits")
    y0, y1 = float(rows[0]), float(rows[-1] + 1)
    x0, x1 = float(cols[0]), float(cols[-1] + 1)
    return Polygon.from_points([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def convex_iou(a: Polygon, b: Polygon) -> float:
    """Exact IoU for convex polygons via clipping (oracle counterpart of iou)."""
    inter = convex_intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def regular_polygon(cx: float, cy: float, radius: float, sides: int,
                    phase: float = 0.0) -> Polygon:
    """Convex helper used by tests and demo data."""
    pts = []
    for k in range(sides):
        ang = phase + 2.0 * math.pi * k / sides
        pts.append((cx + radius * math.cos(ang), cy + radius * math.sin(ang)))
    return Polygon.from_points(pts)
