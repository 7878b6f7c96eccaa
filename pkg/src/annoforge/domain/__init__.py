"""Annotation records, label hierarchy, and the QC-workflow store."""

from .hierarchy import Hierarchy
from .records import (
    LIVE_STATUSES,
    QC_PENDING_STATUSES,
    Annotation,
    AnnotationState,
    AnnotationStatus,
    Author,
    HierarchyNode,
    ImageRecord,
    LabelClass,
    ReferenceImage,
)
from .store import AnnotationStore

__all__ = [
    "Annotation",
    "AnnotationState",
    "AnnotationStatus",
    "AnnotationStore",
    "Author",
    "Hierarchy",
    "HierarchyNode",
    "ImageRecord",
    "LabelClass",
    "LIVE_STATUSES",
    "QC_PENDING_STATUSES",
    "ReferenceImage",
]
