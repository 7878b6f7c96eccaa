"""Dataset pipeline: deterministic splitting, augmentation, export/import."""

from .augment import (
    AugmentationSpec,
    AugmentedSample,
    HorizontalFlip,
    RandomCrop,
    Resize,
    VerticalFlip,
    augment,
)
from .export import FORMATS, export, import_canonical
from .split import DatasetSelection, SplitResult, resolve_selection, split

__all__ = [
    "AugmentationSpec",
    "AugmentedSample",
    "DatasetSelection",
    "FORMATS",
    "HorizontalFlip",
    "RandomCrop",
    "Resize",
    "SplitResult",
    "VerticalFlip",
    "augment",
    "export",
    "import_canonical",
    "resolve_selection",
    "split",
]
