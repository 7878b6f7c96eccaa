"""Core records: images, labels, hierarchy nodes, references, annotations."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from ..errors import ValidationError
from ..geometry import Polygon


class AnnotationStatus(str, Enum):
    SUBMITTED = "submitted"
    AUTO_ACCEPTED = "auto_accepted"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


# statuses that make an image count as annotated and appear in QC
LIVE_STATUSES = {AnnotationStatus.SUBMITTED, AnnotationStatus.AUTO_ACCEPTED,
                 AnnotationStatus.ACCEPTED}
QC_PENDING_STATUSES = {AnnotationStatus.SUBMITTED, AnnotationStatus.AUTO_ACCEPTED}


class AnnotationState(str, Enum):
    UNANNOTATED = "unannotated"
    IN_PROGRESS = "in_progress"
    ANNOTATED = "annotated"


@dataclass(frozen=True)
class Author:
    kind: str  # "human" | "model"
    id: str

    def __post_init__(self):
        if self.kind not in ("human", "model"):
            raise ValidationError(f"author kind must be human or model, got {self.kind!r}")

    @classmethod
    def human(cls, user_id: str) -> Author:
        return cls("human", user_id)

    @classmethod
    def model(cls, model_id: str) -> Author:
        return cls("model", model_id)

    def to_json(self) -> dict[str, str]:
        return {"kind": self.kind, "id": self.id}

    @classmethod
    def from_json(cls, doc: dict[str, str]) -> Author:
        return cls(doc["kind"], doc["id"])


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    folder_id: str
    file_path: str  # relative to the data root, posix separators
    width: int
    height: int

    def to_json(self) -> dict[str, Any]:
        return {
            "image_id": self.image_id,
            "folder_id": self.folder_id,
            "file_path": self.file_path,
            "width": self.width,
            "height": self.height,
        }


@dataclass(frozen=True)
class HierarchyNode:
    node_id: str
    name: str
    parent: Optional[str]
    children: tuple[str, ...]

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class LabelClass:
    label_id: str
    name: str
    hierarchy_path: tuple[str, ...]  # node ids from root to this leaf


@dataclass(frozen=True)
class ReferenceImage:
    label_id: str
    file_path: str
    caption: Optional[str] = None

    def to_json(self) -> dict[str, Any]:
        return {"label_id": self.label_id, "file_path": self.file_path,
                "caption": self.caption}


@dataclass
class Annotation:
    """One labeled polygon on one image, with its QC lifecycle state."""

    annotation_id: str
    image_id: str
    polygon: Polygon
    label_id: str
    author: Author
    confidence: float
    status: AnnotationStatus
    created_at: float
    updated_at: float
    revision: int = 1
    reviewer: Optional[str] = None
    reject_reason: Optional[str] = None
    history: list[dict[str, Any]] = field(default_factory=list)

    @property
    def machine_authored(self) -> bool:
        return self.author.kind == "model"

    def to_json(self, include_history: bool = True) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "annotation_id": self.annotation_id,
            "image_id": self.image_id,
            "polygon": self.polygon.to_json(),
            "label_id": self.label_id,
            "author": self.author.to_json(),
            "confidence": self.confidence,
            "status": self.status.value,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "revision": self.revision,
            "reviewer": self.reviewer,
            "reject_reason": self.reject_reason,
            "machine_authored": self.machine_authored,
        }
        if include_history:
            doc["history"] = self.history
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> Annotation:
        return cls(
            annotation_id=doc["annotation_id"],
            image_id=doc["image_id"],
            polygon=Polygon.from_points(doc["polygon"]),
            label_id=doc["label_id"],
            author=Author.from_json(doc["author"]),
            confidence=float(doc["confidence"]),
            status=AnnotationStatus(doc["status"]),
            created_at=float(doc["created_at"]),
            updated_at=float(doc["updated_at"]),
            revision=int(doc.get("revision", 1)),
            reviewer=doc.get("reviewer"),
            reject_reason=doc.get("reject_reason"),
            history=list(doc.get("history", [])),
        )
