"""File-backed annotation store and the quality-check state machine.

Disk layout under the data root:

    folders/<folder_id>/images/*                   source images
    folders/<folder_id>/annotations/<image_id>.ann.json
    hierarchy.json                                 label tree
    references/<label_id>/*                        reference images
    references/<label_id>/captions.json            optional captions

Annotation documents are rewritten atomically on every mutation, with
stable key ordering, so the store survives a hard kill and diffs cleanly.
Store operations serialize on one lock: QC transitions on a single
annotation are linearizable (first decision wins, the loser gets
IllegalTransition).
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Optional

from ..clock import Clock, SystemClock
from ..errors import (
    DataRootCorrupt,
    IllegalTransition,
    OutOfBounds,
    UnknownAnnotation,
    UnknownFolder,
    UnknownImage,
    ValidationError,
)
from ..geometry import PixelRect, Polygon, clip_polygon_to_rect
from ..imagefiles import IMAGE_SUFFIXES, read_image_size
from .hierarchy import Hierarchy
from .records import (
    LIVE_STATUSES,
    QC_PENDING_STATUSES,
    Annotation,
    AnnotationState,
    AnnotationStatus,
    Author,
    ImageRecord,
    ReferenceImage,
)

ANN_SUFFIX = ".ann.json"


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class AnnotationStore:
    def __init__(self, data_root: Path | str, clock: Optional[Clock] = None,
                 auto_accept_threshold: float = 0.80):
        self.data_root = Path(data_root)
        self.clock = clock or SystemClock()
        self.auto_accept_threshold = auto_accept_threshold
        self._lock = threading.RLock()

        self.hierarchy = Hierarchy.load(self.data_root / "hierarchy.json")
        self.images: dict[str, ImageRecord] = {}
        self.folder_ids: list[str] = []
        self.annotations: dict[str, Annotation] = {}
        self._by_image: dict[str, list[str]] = {}
        self.references: dict[str, list[ReferenceImage]] = {}

        self._scan_folders()
        self._scan_references()
        self._load_annotations()

    # --- boot ---------------------------------------------------------------

    def _scan_folders(self) -> None:
        folders_dir = self.data_root / "folders"
        if not folders_dir.exists():
            return
        for folder in sorted(p for p in folders_dir.iterdir() if p.is_dir()):
            folder_id = folder.name
            self.folder_ids.append(folder_id)
            images_dir = folder / "images"
            if not images_dir.exists():
                continue
            for img in sorted(images_dir.iterdir()):
                if img.suffix.lower() not in IMAGE_SUFFIXES:
                    continue
                image_id = f"{folder_id}.{img.stem}"
                if image_id in self.images:
                    raise DataRootCorrupt(
                        f"duplicate image stem {img.stem!r} in folder {folder_id!r}")
                width, height = read_image_size(img)
                self.images[image_id] = ImageRecord(
                    image_id=image_id,
                    folder_id=folder_id,
                    file_path=img.relative_to(self.data_root).as_posix(),
                    width=width,
                    height=height,
                )
                self._by_image[image_id] = []

    def _scan_references(self) -> None:
        refs_dir = self.data_root / "references"
        if not refs_dir.exists():
            return
        for label_dir in sorted(p for p in refs_dir.iterdir() if p.is_dir()):
            label_id = label_dir.name
            if label_id not in self.hierarchy.labels:
                raise DataRootCorrupt(
                    f"reference directory for unknown label {label_id!r}")
            captions: dict[str, str] = {}
            cap_file = label_dir / "captions.json"
            if cap_file.exists():
                captions = json.loads(cap_file.read_text(encoding="utf-8"))
            refs = []
            for f in sorted(label_dir.iterdir()):
                if f.suffix.lower() not in IMAGE_SUFFIXES:
                    continue
                refs.append(ReferenceImage(
                    label_id=label_id,
                    file_path=f.relative_to(self.data_root).as_posix(),
                    caption=captions.get(f.name),
                ))
            self.references[label_id] = refs

    def _load_annotations(self) -> None:
        for folder_id in self.folder_ids:
            ann_dir = self.data_root / "folders" / folder_id / "annotations"
            if not ann_dir.exists():
                continue
            for path in sorted(ann_dir.glob(f"*{ANN_SUFFIX}")):
                try:
                    doc = json.loads(path.read_text(encoding="utf-8"))
                except json.JSONDecodeError as exc:
                    raise DataRootCorrupt(f"{path}: invalid JSON ({exc})") from exc
                image_id = doc.get("image_id")
                if image_id not in self.images:
                    raise DataRootCorrupt(f"{path}: unknown image {image_id!r}")
                for ann_doc in doc.get("annotations", []):
                    ann = Annotation.from_json(ann_doc)
                    if ann.label_id not in self.hierarchy.labels:
                        raise DataRootCorrupt(
                            f"{path}: annotation {ann.annotation_id} has unknown "
                            f"label {ann.label_id!r}")
                    self.annotations[ann.annotation_id] = ann
                    self._by_image[image_id].append(ann.annotation_id)

    # --- persistence ----------------------------------------------------------

    def _ann_path(self, image_id: str) -> Path:
        folder_id = self.images[image_id].folder_id
        return (self.data_root / "folders" / folder_id / "annotations"
                / f"{image_id}{ANN_SUFFIX}")

    def _persist_image(self, image_id: str) -> None:
        path = self._ann_path(image_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        anns = [self.annotations[a].to_json() for a in sorted(self._by_image[image_id])]
        doc = {"image_id": image_id, "annotations": anns}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
                       encoding="utf-8")
        tmp.replace(path)

    # --- lookups ----------------------------------------------------------------

    def require_folder(self, folder_id: str) -> str:
        if folder_id not in self.folder_ids:
            raise UnknownFolder(f"no folder {folder_id!r}")
        return folder_id

    def require_image(self, image_id: str) -> ImageRecord:
        img = self.images.get(image_id)
        if img is None:
            raise UnknownImage(f"no image {image_id!r}")
        return img

    def require_annotation(self, annotation_id: str) -> Annotation:
        ann = self.annotations.get(annotation_id)
        if ann is None:
            raise UnknownAnnotation(f"no annotation {annotation_id!r}")
        return ann

    def images_in_folder(self, folder_id: str) -> list[ImageRecord]:
        self.require_folder(folder_id)
        return sorted((img for img in self.images.values() if img.folder_id == folder_id),
                      key=lambda im: im.image_id)

    def annotations_for_image(self, image_id: str) -> list[Annotation]:
        self.require_image(image_id)
        return [self.annotations[a] for a in sorted(self._by_image[image_id])]

    def live_annotations(self, image_id: str) -> list[Annotation]:
        return [a for a in self.annotations_for_image(image_id)
                if a.status in LIVE_STATUSES]

    def annotation_state(self, image_id: str,
                         leased_ids: Optional[set[str]] = None) -> AnnotationState:
        if self.live_annotations(image_id):
            return AnnotationState.ANNOTATED
        if leased_ids and image_id in leased_ids:
            return AnnotationState.IN_PROGRESS
        return AnnotationState.UNANNOTATED

    def eligible_annotations(self, image_id: str,
                             include_auto_accepted: bool = False) -> list[Annotation]:
        """Annotations that may feed training exports."""
        keep = {AnnotationStatus.ACCEPTED}
        if include_auto_accepted:
            keep.add(AnnotationStatus.AUTO_ACCEPTED)
        return [a for a in self.annotations_for_image(image_id) if a.status in keep]

    def accepted_human_annotations(self, image_id: str) -> list[Annotation]:
        return [a for a in self.annotations_for_image(image_id)
                if a.status == AnnotationStatus.ACCEPTED and a.author.kind == "human"]

    # --- mutations ----------------------------------------------------------------

    def create_annotation(self, image_id: str, polygon: Polygon, label_id: str,
                          author: Author, confidence: Optional[float] = None) -> Annotation:
        with self._lock:
            image = self.require_image(image_id)
            self.hierarchy.require_label(label_id)
            clipped = clip_polygon_to_rect(
                polygon, PixelRect(0, 0, image.width, image.height))
            if clipped is None:
                raise OutOfBounds(
                    f"polygon has no area inside image {image_id!r}")
            if author.kind == "human":
                confidence = 1.0
                status = AnnotationStatus.SUBMITTED
            else:
                if confidence is None:
                    raise ValidationError("model annotations require a confidence")
                if not 0.0 <= confidence <= 1.0:
                    raise ValidationError(f"confidence {confidence} outside [0, 1]")
                if confidence < self.auto_accept_threshold:
                    raise ValidationError(
                        f"model annotations enter only at confidence >= "
                        f"{self.auto_accept_threshold}, got {confidence}")
                status = AnnotationStatus.AUTO_ACCEPTED
            now = self.clock.now()
            ann = Annotation(
                annotation_id=_new_id("ann"),
                image_id=image_id,
                polygon=clipped,
                label_id=label_id,
                author=author,
                confidence=confidence,
                status=status,
                created_at=now,
                updated_at=now,
            )
            self.annotations[ann.annotation_id] = ann
            self._by_image[image_id].append(ann.annotation_id)
            self._persist_image(image_id)
            return ann

    def adopt_annotation(self, ann: Annotation) -> Annotation:
        """Insert a fully-formed annotation (import path), replacing any
        existing annotation with the same id."""
        with self._lock:
            self.require_image(ann.image_id)
            self.hierarchy.require_label(ann.label_id)
            prior = self.annotations.get(ann.annotation_id)
            if prior is not None and prior.image_id != ann.image_id:
                self._by_image[prior.image_id].remove(ann.annotation_id)
                self._persist_image(prior.image_id)
            if prior is None or prior.image_id != ann.image_id:
                self._by_image[ann.image_id].append(ann.annotation_id)
            self.annotations[ann.annotation_id] = ann
            self._persist_image(ann.image_id)
            return ann

    def qc_list(self, folder: Optional[str] = None,
                status: Optional[AnnotationStatus] = None,
                author_kind: Optional[str] = None) -> list[Annotation]:
        with self._lock:
            if folder is not None:
                self.require_folder(folder)
            out = []
            for ann in self.annotations.values():
                if ann.status not in QC_PENDING_STATUSES:
                    continue
                if status is not None and ann.status != status:
                    continue
                if author_kind is not None and ann.author.kind != author_kind:
                    continue
                if folder is not None and self.images[ann.image_id].folder_id != folder:
                    continue
                out.append(ann)
            out.sort(key=lambda a: (a.created_at, a.annotation_id))
            return out

    def _require_reviewable(self, annotation_id: str) -> Annotation:
        ann = self.require_annotation(annotation_id)
        if ann.status not in QC_PENDING_STATUSES:
            raise IllegalTransition(
                f"annotation {annotation_id} is {ann.status.value}; "
                f"only submitted or auto_accepted annotations can be reviewed")
        return ann

    def qc_accept(self, annotation_id: str, reviewer: str) -> Annotation:
        with self._lock:
            ann = self._require_reviewable(annotation_id)
            ann.status = AnnotationStatus.ACCEPTED
            ann.reviewer = reviewer
            ann.updated_at = self.clock.now()
            self._persist_image(ann.image_id)
            return ann

    def qc_reject(self, annotation_id: str, reviewer: str, reason: str = "") -> Annotation:
        with self._lock:
            ann = self._require_reviewable(annotation_id)
            ann.status = AnnotationStatus.REJECTED
            ann.reviewer = reviewer
            ann.reject_reason = reason
            ann.updated_at = self.clock.now()
            self._persist_image(ann.image_id)
            return ann

    def qc_edit(self, annotation_id: str, reviewer: str,
                new_polygon: Optional[Polygon] = None,
                new_label: Optional[str] = None) -> Annotation:
        if new_polygon is None and new_label is None:
            raise ValidationError("edit requires a new polygon or a new label")
        with self._lock:
            ann = self.require_annotation(annotation_id)
            if ann.status == AnnotationStatus.REJECTED:
                raise IllegalTransition(
                    f"annotation {annotation_id} is rejected and cannot be edited")
            if new_label is not None:
                self.hierarchy.require_label(new_label)
            ann.history.append({
                "revision": ann.revision,
                "polygon": ann.polygon.to_json(),
                "label_id": ann.label_id,
                "status": ann.status.value,
                "updated_at": ann.updated_at,
            })
            if new_polygon is not None:
                image = self.images[ann.image_id]
                clipped = clip_polygon_to_rect(
                    new_polygon, PixelRect(0, 0, image.width, image.height))
                if clipped is None:
                    raise OutOfBounds("edited polygon has no area inside the image")
                ann.polygon = clipped
            if new_label is not None:
                ann.label_id = new_label
            ann.revision += 1
            ann.status = AnnotationStatus.SUBMITTED
            ann.reviewer = reviewer
            ann.updated_at = self.clock.now()
            self._persist_image(ann.image_id)
            return ann

    # --- hierarchy / references -----------------------------------------------

    def hierarchy_children(self, node_id: Optional[str] = None):
        return self.hierarchy.children(node_id)

    def reference_images_for(self, label_id: str) -> list[ReferenceImage]:
        self.hierarchy.require_label(label_id)
        return list(self.references.get(label_id, []))

    # --- folder summaries -------------------------------------------------------

    def folder_summaries(self, leased_ids: Optional[set[str]] = None) -> list[dict]:
        out = []
        for folder_id in self.folder_ids:
            states = [self.annotation_state(im.image_id, leased_ids)
                      for im in self.images_in_folder(folder_id)]
            out.append({
                "folder_id": folder_id,
                "image_count": len(states),
                "unannotated": sum(s == AnnotationState.UNANNOTATED for s in states),
                "in_progress": sum(s == AnnotationState.IN_PROGRESS for s in states),
                "annotated": sum(s == AnnotationState.ANNOTATED for s in states),
            })
        return out
