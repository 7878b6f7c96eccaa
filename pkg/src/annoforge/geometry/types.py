"""Value types for polygon math.

Coordinates are image-space pixels: origin top-left, x right, y down.
All types are immutable; the module is safe under concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DegeneratePolygon, GridMismatch, SingularTransform

Point = tuple[float, float]

# polygons with |shoelace| below this are rejected unless they properly
# self-intersect (a balanced bowtie has zero shoelace but non-empty fill)
MIN_AREA = 1e-6

DEFAULT_SUPERSAMPLE = 3


def shoelace(vertices: Sequence[Point]) -> float:
    """Signed shoelace sum (twice the signed area)."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return total


def _segments_properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    def orient(p: Point, q: Point, r: Point) -> float:
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


def _has_proper_self_intersection(vertices: Sequence[Point]) -> bool:
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        for j in range(i + 1, n):
            # skip adjacent edges (shared endpoint)
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = vertices[j], vertices[(j + 1) % n]
            if _segments_properly_cross(a, b, c, d):
                return True
    return False


@dataclass(frozen=True)
class Polygon:
    """Ordered vertex cycle, interpreted under the even-odd fill rule.

    Construction canonicalizes: consecutive duplicate vertices (including a
    repeated closing vertex) are dropped, then the polygon must have at least
    3 vertices, finite coordinates, and non-degenerate area. Self-intersecting
    input is accepted; a zero-shoelace polygon survives only if its edges
    properly cross (its even-odd fill can still be non-empty).
    """

    vertices: tuple[Point, ...]

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> Polygon:
        raw = [(float(p[0]), float(p[1])) for p in points]
        if any(not (math.isfinite(x) and math.isfinite(y)) for x, y in raw):
            raise DegeneratePolygon("non-finite vertex coordinate")
        cleaned: list[Point] = []
        for pt in raw:
            if not cleaned or pt != cleaned[-1]:
                cleaned.append(pt)
        if len(cleaned) > 1 and cleaned[0] == cleaned[-1]:
            cleaned.pop()
        if len(cleaned) < 3:
            raise DegeneratePolygon(
                f"polygon needs at least 3 distinct vertices, got {len(cleaned)}")
        if abs(shoelace(cleaned)) / 2.0 < MIN_AREA and not _has_proper_self_intersection(cleaned):
            raise DegeneratePolygon("polygon area below minimum")
        return cls(tuple(cleaned))

    @property
    def area(self) -> float:
        return abs(shoelace(self.vertices)) / 2.0

    def bbox(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y)."""
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Vertex coordinates as contiguous float64 arrays for the kernels."""
        xs = np.fromiter((p[0] for p in self.vertices), dtype=np.float64)
        ys = np.fromiter((p[1] for p in self.vertices), dtype=np.float64)
        return xs, ys

    def to_json(self) -> list[list[float]]:
        return [[x, y] for x, y in self.vertices]


@dataclass(frozen=True)
class PixelRect:
    """Axis-aligned rectangle: inclusive top-left corner plus extent."""

    x0: float
    y0: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("PixelRect requires positive width and height")

    @property
    def x1(self) -> float:
        return self.x0 + self.width

    @property
    def y1(self) -> float:
        return self.y0 + self.height

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class GridSpec:
    """Rasterization grid: pixel dimensions plus samples per pixel edge."""

    width: int
    height: int
    supersample: int = DEFAULT_SUPERSAMPLE

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.supersample < 1:
            raise ValueError("GridSpec fields must be >= 1")


class RasterMask:
    """Row-major bit grid. Bits are stored as a read-only numpy bool array."""

    __slots__ = ("width", "height", "bits")

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("mask bits must be a 2-D grid")
        bits.setflags(write=False)
        self.bits = bits
        self.height, self.width = bits.shape

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def matches(self, grid: GridSpec) -> bool:
        return self.width == grid.width and self.height == grid.height

    def require_grid(self, grid: GridSpec) -> None:
        if not self.matches(grid):
            raise GridMismatch(
                f"mask is {self.width}x{self.height}, grid is {grid.width}x{grid.height}")

    def __eq__(self, other) -> bool:
        return isinstance(other, RasterMask) and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class AffineTransform:
    """2x3 affine map: (x, y) -> (a*x + b*y + tx, c*x + d*y + ty)."""

    a: float
    b: float
    tx: float
    c: float
    d: float
    ty: float

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def apply(self, x: float, y: float) -> Point:
        return (self.a * x + self.b * y + self.tx,
                self.c * x + self.d * y + self.ty)

    def inverse(self) -> AffineTransform:
        det = self.det
        if det == 0:
            raise SingularTransform("transform is not invertible")
        ia, ib = self.d / det, -self.b / det
        ic, id_ = -self.c / det, self.a / det
        return AffineTransform(
            a=ia, b=ib, tx=-(ia * self.tx + ib * self.ty),
            c=ic, d=id_, ty=-(ic * self.tx + id_ * self.ty),
        )

    def then(self, other: AffineTransform) -> AffineTransform:
        """Composition: apply self first, then other."""
        return AffineTransform(
            a=other.a * self.a + other.b * self.c,
            b=other.a * self.b + other.b * self.d,
            tx=other.a * self.tx + other.b * self.ty + other.tx,
            c=other.c * self.a + other.d * self.c,
            d=other.c * self.b + other.d * self.d,
            ty=other.c * self.tx + other.d * self.ty + other.ty,
        )

    @classmethod
    def identity(cls) -> AffineTransform:
        return cls(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)

    @classmethod
    def translation(cls, dx: float, dy: float) -> AffineTransform:
        return cls(1.0, 0.0, dx, 0.0, 1.0, dy)

    @classmethod
    def scaling(cls, sx: float, sy: float) -> AffineTransform:
        return cls(sx, 0.0, 0.0, 0.0, sy, 0.0)

    @classmethod
    def horizontal_flip(cls, width: float) -> AffineTransform:
        return cls(-1.0, 0.0, width, 0.0, 1.0, 0.0)

    @classmethod
    def vertical_flip(cls, height: float) -> AffineTransform:
        return cls(1.0, 0.0, 0.0, 0.0, -1.0, height)
