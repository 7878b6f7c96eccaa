"""Polygon math: area, containment, rasterization, clipping, transforms, IoU."""

from .backend import BACKEND
from .ops import (
    bbox_iou,
    clamp_point_to_rect,
    clip_polygon_to_rect,
    convex_intersection_area,
    convex_iou,
    iou,
    mask_bounding_polygon,
    point_in_polygon,
    polygon_area,
    raster_area,
    rasterize,
    regular_polygon,
    sample_counts,
    transform_polygon,
)
from .rle import mask_to_rle, rle_to_mask
from .types import (
    DEFAULT_SUPERSAMPLE,
    AffineTransform,
    GridSpec,
    PixelRect,
    Polygon,
    RasterMask,
)

__all__ = [
    "AffineTransform",
    "BACKEND",
    "DEFAULT_SUPERSAMPLE",
    "GridSpec",
    "PixelRect",
    "Polygon",
    "RasterMask",
    "bbox_iou",
    "clamp_point_to_rect",
    "clip_polygon_to_rect",
    "convex_intersection_area",
    "convex_iou",
    "iou",
    "mask_bounding_polygon",
    "mask_to_rle",
    "point_in_polygon",
    "polygon_area",
    "raster_area",
    "rasterize",
    "regular_polygon",
    "rle_to_mask",
    "sample_counts",
    "transform_polygon",
]
