"""Deterministic train/eval splitting at image granularity.

Images (never individual annotations) are the split unit so the same image
cannot leak into both sets. The shuffle is seeded and applied to the sorted
id list, making the result reproducible across stores and runs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from ..domain import Annotation, AnnotationStore
from ..errors import EmptySelection, InsufficientData, ValidationError


@dataclass(frozen=True)
class DatasetSelection:
    folder_ids: tuple[str, ...]
    label_filter: Optional[frozenset[str]] = None
    include_auto_accepted: bool = False

    @classmethod
    def create(cls, folder_ids, label_filter=None,
               include_auto_accepted: bool = False) -> "DatasetSelection":
        return cls(
            folder_ids=tuple(folder_ids),
            label_filter=frozenset(label_filter) if label_filter else None,
            include_auto_accepted=bool(include_auto_accepted),
        )

    def to_json(self) -> dict:
        return {
            "folder_ids": list(self.folder_ids),
            "label_filter": sorted(self.label_filter) if self.label_filter else None,
            "include_auto_accepted": self.include_auto_accepted,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DatasetSelection":
        return cls.create(
            doc["folder_ids"],
            doc.get("label_filter"),
            doc.get("include_auto_accepted", False),
        )


@dataclass(frozen=True)
class SplitResult:
    train: tuple[str, ...]
    eval: tuple[str, ...]
    seed: int
    ratio: float

    def to_json(self) -> dict:
        return {"train": list(self.train), "eval": list(self.eval),
                "seed": self.seed, "ratio": self.ratio}

    @classmethod
    def from_json(cls, doc: dict) -> "SplitResult":
        return cls(train=tuple(doc["train"]), eval=tuple(doc["eval"]),
                   seed=int(doc["seed"]), ratio=float(doc["ratio"]))


def resolve_selection(store: AnnotationStore, selection: DatasetSelection
                      ) -> dict[str, list[Annotation]]:
    """Map image_id -> export-eligible annotations, images without any omitted."""
    if not selection.folder_ids:
        raise EmptySelection("selection names no folders")
    out: dict[str, list[Annotation]] = {}
    for folder_id in selection.folder_ids:
        for image in store.images_in_folder(folder_id):
            anns = store.eligible_annotations(
                image.image_id, selection.include_auto_accepted)
            if selection.label_filter is not None:
                for ann in anns:
                    if ann.label_id not in store.hierarchy.labels:
                        raise EmptySelection(f"unknown label in filter")
                anns = [a for a in anns if a.label_id in selection.label_filter]
            if anns:
                out[image.image_id] = anns
    return out


def split(store: AnnotationStore, selection: DatasetSelection,
          ratio: float, seed: int) -> SplitResult:
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must be in (0, 1), got {ratio}")
    resolved = resolve_selection(store, selection)
    image_ids = sorted(resolved)
    n = len(image_ids)
    if n == 0:
        raise EmptySelection("selection contains no images with eligible annotations")
    if n < 2:
        raise InsufficientData(f"need at least 2 images to split, got {n}")
    rng = random.Random(seed)
    rng.shuffle(image_ids)
    # the +1e-9 nudge makes float products like 0.3*10 floor mathematically
    n_train = int(math.floor(ratio * n + 1e-9))
    return SplitResult(
        train=tuple(image_ids[:n_train]),
        eval=tuple(image_ids[n_train:]),
        seed=seed,
        ratio=ratio,
    )
