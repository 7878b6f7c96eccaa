"""Geometric augmentation over annotation coordinates.

The platform transforms polygon coordinates and emits an op trail a worker
can replay on the pixels; it never touches image bytes itself. Flips and
resizes are affine maps; crops clip polygons to the window and drop
annotations that lose too much area.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Union

from ..domain import AnnotationStore
from ..errors import NoAcceptedAnnotations, ValidationError
from ..geometry import AffineTransform, PixelRect, Polygon, clip_polygon_to_rect, transform_polygon


@dataclass(frozen=True)
class HorizontalFlip:
    p: float = 0.5


@dataclass(frozen=True)
class VerticalFlip:
    p: float = 0.5


@dataclass(frozen=True)
class RandomCrop:
    min_fraction: float = 0.5  # smallest surviving edge fraction


@dataclass(frozen=True)
class Resize:
    width: int
    height: int


AugOp = Union[HorizontalFlip, VerticalFlip, RandomCrop, Resize]


@dataclass(frozen=True)
class AugmentationSpec:
    ops: tuple[AugOp, ...]
    variants_per_image: int
    seed: int
    min_kept_area_fraction: float = 0.25

    def __post_init__(self):
        for op in self.ops:
            if isinstance(op, (HorizontalFlip, VerticalFlip)) and not 0.0 <= op.p <= 1.0:
                raise ValidationError(f"flip probability {op.p} outside [0, 1]")
            if isinstance(op, RandomCrop) and not 0.0 < op.min_fraction <= 1.0:
                raise ValidationError(
                    f"crop min_fraction {op.min_fraction} outside (0, 1]")
        if self.variants_per_image < 0:
            raise ValidationError("variants_per_image must be >= 0")


@dataclass
class AugmentedSample:
    image_id: str
    variant: int
    width: int
    height: int
    ops_applied: list[dict]
    annotations: list[dict]  # {annotation_id, label_id, polygon}


def augment(store: AnnotationStore, image_id: str, spec: AugmentationSpec,
            include_auto_accepted: bool = False) -> list[AugmentedSample]:
    image = store.require_image(image_id)
    source = store.eligible_annotations(image_id, include_auto_accepted)
    if not source:
        raise NoAcceptedAnnotations(f"image {image_id!r} has no accepted annotations")

    samples = []
    for variant in range(spec.variants_per_image):
        rng = random.Random(f"{spec.seed}:{image_id}:{variant}")
        width, height = image.width, image.height
        anns: list[tuple[str, str, Polygon]] = [
            (a.annotation_id, a.label_id, a.polygon) for a in source]
        trail: list[dict] = []

        for op in spec.ops:
            if isinstance(op, HorizontalFlip):
                roll = rng.random()
                if roll < op.p:
                    t = AffineTransform.horizontal_flip(width)
                    anns = [(i, l, transform_polygon(p, t)) for i, l, p in anns]
                    trail.append({"op": "horizontal_flip"})
            elif isinstance(op, VerticalFlip):
                roll = rng.random()
                if roll < op.p:
                    t = AffineTransform.vertical_flip(height)
                    anns = [(i, l, transform_polygon(p, t)) for i, l, p in anns]
                    trail.append({"op": "vertical_flip"})
            elif isinstance(op, RandomCrop):
                min_w = max(1, int(round(width * op.min_fraction)))
                min_h = max(1, int(round(height * op.min_fraction)))
                crop_w = rng.randint(min_w, width)
                crop_h = rng.randint(min_h, height)
                x0 = rng.randint(0, width - crop_w)
                y0 = rng.randint(0, height - crop_h)
                window = PixelRect(x0, y0, crop_w, crop_h)
                shift = AffineTransform.translation(-x0, -y0)
                kept: list[tuple[str, str, Polygon]] = []
                for i, l, p in anns:
                    clipped = clip_polygon_to_rect(p, window)
                    if clipped is None:
                        continue
                    if clipped.area < spec.min_kept_area_fraction * p.area:
                        continue
                    kept.append((i, l, transform_polygon(clipped, shift)))
                anns = kept
                width, height = crop_w, crop_h
                trail.append({"op": "crop", "x0": x0, "y0": y0,
                              "width": crop_w, "height": crop_h})
            elif isinstance(op, Resize):
                t = AffineTransform.scaling(op.width / width, op.height / height)
                anns = [(i, l, transform_polygon(p, t)) for i, l, p in anns]
                width, height = op.width, op.height
                trail.append({"op": "resize", "width": op.width, "height": op.height})
            else:
                raise ValidationError(f"unknown augmentation op {op!r}")

        samples.append(AugmentedSample(
            image_id=image_id,
            variant=variant,
            width=width,
            height=height,
            ops_applied=trail,
            annotations=[{"annotation_id": i, "label_id": l, "polygon": p.to_json()}
                         for i, l, p in anns],
        ))
    return samples
