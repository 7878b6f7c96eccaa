"""Uncertainty-sampling scheduler.

Confidence banding drives three behaviors: high-confidence predictions are
auto-accepted into the annotation store, mid-band (ambiguous) predictions
push their image to the front of the human queue, and everything else is
ordered by distance from maximal ambiguity |confidence - 0.5|.

The prediction log keeps every ingested prediction (including auto-accepted
and redundant ones) for evaluation; the queue keeps only the latest
prediction per (model, image).
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .domain import AnnotationStore, Author
from .errors import OutOfRange
from .geometry import (
    DEFAULT_SUPERSAMPLE,
    GridSpec,
    Polygon,
    RasterMask,
    iou,
    mask_bounding_polygon,
)


class ConfidenceBand(str, Enum):
    AUTO_ACCEPT = "auto_accept"
    UNCERTAIN = "uncertain"
    NORMAL = "normal"


class IngestKind(str, Enum):
    AUTO_ACCEPTED = "auto_accepted"
    QUEUED = "queued"
    REPLACED = "replaced"
    DROPPED = "dropped"  # redundant with an accepted human annotation


@dataclass(frozen=True)
class IngestAction:
    kind: IngestKind
    annotation_id: Optional[str] = None

    def to_json(self) -> dict:
        doc: dict = {"action": self.kind.value}
        if self.annotation_id is not None:
            doc["annotation_id"] = self.annotation_id
        return doc


@dataclass(frozen=True)
class ModelPrediction:
    prediction_id: str
    image_id: str
    model_id: str
    label_id: str
    geometry: Union[Polygon, RasterMask]
    confidence: float
    training_instance: int
    produced_at: float

    @classmethod
    def create(cls, image_id: str, model_id: str, label_id: str,
               geometry: Union[Polygon, RasterMask], confidence: float,
               training_instance: int, produced_at: float,
               prediction_id: Optional[str] = None) -> "ModelPrediction":
        return cls(
            prediction_id=prediction_id or f"pred-{uuid.uuid4().hex[:12]}",
            image_id=image_id, model_id=model_id, label_id=label_id,
            geometry=geometry, confidence=float(confidence),
            training_instance=int(training_instance), produced_at=produced_at,
        )


@dataclass(frozen=True)
class QueueEntry:
    image_id: str
    score: float
    band: ConfidenceBand
    basis: int  # how many predictions fed the score


class ActiveLearningScheduler:
    def __init__(self, store: AnnotationStore,
                 auto_accept_threshold: float = 0.80,
                 uncertain_low: float = 0.40,
                 uncertain_high: float = 0.60,
                 unpredicted_score: float = 0.15,
                 redundant_iou: float = 0.90,
                 supersample: int = DEFAULT_SUPERSAMPLE):
        if not uncertain_low < uncertain_high < auto_accept_threshold:
            raise ValueError("thresholds must satisfy low < high < auto_accept")
        self.store = store
        self.auto_accept_threshold = auto_accept_threshold
        self.uncertain_low = uncertain_low
        self.uncertain_high = uncertain_high
        self.unpredicted_score = unpredicted_score
        self.redundant_iou = redundant_iou
        self.supersample = supersample
        self._lock = threading.Lock()
        self.prediction_log: list[ModelPrediction] = []
        self._queue: dict[tuple[str, str], ModelPrediction] = {}

    # --- banding ----------------------------------------------------------------

    def band(self, confidence: float) -> ConfidenceBand:
        if not 0.0 <= confidence <= 1.0:
            raise OutOfRange(f"confidence {confidence} outside [0, 1]")
        if confidence >= self.auto_accept_threshold:
            return ConfidenceBand.AUTO_ACCEPT
        if self.uncertain_low <= confidence <= self.uncertain_high:
            return ConfidenceBand.UNCERTAIN
        return ConfidenceBand.NORMAL

    # --- ingest ----------------------------------------------------------------

    def _is_redundant(self, pred: ModelPrediction) -> bool:
        image = self.store.require_image(pred.image_id)
        grid = GridSpec(image.width, image.height, self.supersample)
        for ann in self.store.annotations_for_image(pred.image_id):
            if ann.status.value != "accepted" or ann.author.kind != "human":
                continue
            if ann.label_id != pred.label_id:
                continue
            if iou(pred.geometry, ann.polygon, grid) >= self.redundant_iou:
                return True
        return False

    def ingest_prediction(self, pred: ModelPrediction) -> IngestAction:
        self.store.require_image(pred.image_id)
        self.store.hierarchy.require_label(pred.label_id)
        band = self.band(pred.confidence)
        redundant = self._is_redundant(pred)
        with self._lock:
            key = (pred.model_id, pred.image_id)
            had_prior = key in self._queue
            self._queue.pop(key, None)  # latest prediction from a model wins
            self.prediction_log.append(pred)
            if redundant:
                return IngestAction(IngestKind.DROPPED)
            if band == ConfidenceBand.AUTO_ACCEPT:
                polygon = (pred.geometry if isinstance(pred.geometry, Polygon)
                           else mask_bounding_polygon(pred.geometry))
                ann = self.store.create_annotation(
                    pred.image_id,
                    polygon,
                    pred.label_id,
                    Author.model(pred.model_id),
                    confidence=pred.confidence,
                )
                return IngestAction(IngestKind.AUTO_ACCEPTED, ann.annotation_id)
            self._queue[key] = pred
            return IngestAction(IngestKind.REPLACED if had_prior else IngestKind.QUEUED)

    def restore_prediction(self, pred: ModelPrediction, action: str) -> None:
        """Journal-replay path: rebuild log and queue without side effects."""
        with self._lock:
            key = (pred.model_id, pred.image_id)
            self._queue.pop(key, None)
            self.prediction_log.append(pred)
            if action in (IngestKind.QUEUED.value, IngestKind.REPLACED.value):
                self._queue[key] = pred

    # --- scoring ----------------------------------------------------------------

    def score_image(self, predictions: Sequence[ModelPrediction]) -> float:
        """min |confidence - 0.5| over non-auto-accept predictions.

        Images with nothing informative score unpredicted_score: after the
        uncertain band but ahead of confidently-classified images.
        """
        distances = [abs(p.confidence - 0.5) for p in predictions
                     if self.band(p.confidence) != ConfidenceBand.AUTO_ACCEPT]
        if not distances:
            return self.unpredicted_score
        return min(distances)

    def queue_entry(self, image_id: str) -> QueueEntry:
        with self._lock:
            preds = [p for (_, iid), p in self._queue.items() if iid == image_id]
        score = self.score_image(preds)
        considered = [p for p in preds
                      if self.band(p.confidence) != ConfidenceBand.AUTO_ACCEPT]
        if considered:
            most_uncertain = min(considered, key=lambda p: abs(p.confidence - 0.5))
            band = self.band(most_uncertain.confidence)
        else:
            band = ConfidenceBand.NORMAL
        return QueueEntry(image_id=image_id, score=score, band=band,
                          basis=len(considered))

    def rank_folder(self, folder_id: str) -> list[str]:
        """Unannotated images, most ambiguous first; image_id breaks ties."""
        images = self.store.images_in_folder(folder_id)
        with self._lock:
            by_image: dict[str, list[ModelPrediction]] = {}
            for (_, image_id), pred in self._queue.items():
                by_image.setdefault(image_id, []).append(pred)
        scored = []
        for image in images:
            if self.store.live_annotations(image.image_id):
                continue
            score = self.score_image(by_image.get(image.image_id, []))
            scored.append((score, image.image_id))
        scored.sort()
        return [image_id for _, image_id in scored]

    # --- evaluation queries -------------------------------------------------------

    def predictions_for(self, model_id: str, training_instance: Optional[int] = None,
                        image_id: Optional[str] = None) -> list[ModelPrediction]:
        with self._lock:
            out = [p for p in self.prediction_log if p.model_id == model_id]
        if training_instance is not None:
            out = [p for p in out if p.training_instance == training_instance]
        if image_id is not None:
            out = [p for p in out if p.image_id == image_id]
        return out
