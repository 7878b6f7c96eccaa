"""Prediction-to-ground-truth matching and per-model / per-class reporting.

Matching is greedy max-IoU with deterministic tie-breaking, gated by label.
Unmatched ground truth counts as IoU 0 in the class mean (a model that
misses objects scores lower); spurious predictions are counted but never
enter the mean. Means use math.fsum so they are permutation-invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .active_learning import ModelPrediction
from .domain import Annotation, AnnotationStore
from .errors import MixedImages, NoData, NoPredictions
from .geometry import DEFAULT_SUPERSAMPLE, GridSpec, iou
from .pipeline import DatasetSelection

ALL_CLASSES = "ALL"


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[str, str, float], ...]  # (annotation_id, prediction_id, iou)
    unmatched_ground_truth: tuple[str, ...]
    unmatched_predictions: tuple[str, ...]


@dataclass(frozen=True)
class ClassReport:
    model_id: str
    label_id: str
    mean_iou: float
    matched: int
    missed_ground_truth: int
    spurious_predictions: int
    training_instance: int

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "label_id": self.label_id,
            "mean_iou": self.mean_iou,
            "matched": self.matched,
            "missed_ground_truth": self.missed_ground_truth,
            "spurious_predictions": self.spurious_predictions,
            "training_instance": self.training_instance,
        }


def match_predictions(ground_truth: Sequence[Annotation],
                      preds: Sequence[ModelPrediction],
                      grid: GridSpec,
                      match_min_iou: float = 0.0) -> MatchResult:
    image_ids = {a.image_id for a in ground_truth} | {p.image_id for p in preds}
    if len(image_ids) > 1:
        raise MixedImages(f"items span multiple images: {sorted(image_ids)}")

    candidates = []
    for ann in ground_truth:
        for pred in preds:
            if ann.label_id != pred.label_id:
                continue
            value = iou(ann.polygon, pred.geometry, grid)
            if value > 0 and value >= match_min_iou:
                candidates.append((ann.annotation_id, pred.prediction_id, value))
    candidates.sort(key=lambda c: (-c[2], c[0], c[1]))

    taken_gt: set[str] = set()
    taken_pred: set[str] = set()
    pairs = []
    for ann_id, pred_id, value in candidates:
        if ann_id in taken_gt or pred_id in taken_pred:
            continue
        taken_gt.add(ann_id)
        taken_pred.add(pred_id)
        pairs.append((ann_id, pred_id, value))

    return MatchResult(
        pairs=tuple(pairs),
        unmatched_ground_truth=tuple(sorted(
            a.annotation_id for a in ground_truth if a.annotation_id not in taken_gt)),
        unmatched_predictions=tuple(sorted(
            p.prediction_id for p in preds if p.prediction_id not in taken_pred)),
    )


def per_class_report(store: AnnotationStore,
                     predictions: Sequence[ModelPrediction],
                     model_id: str,
                     training_instance: int,
                     scope: DatasetSelection,
                     image_ids: Optional[set[str]] = None,
                     match_min_iou: float = 0.0,
                     supersample: int = DEFAULT_SUPERSAMPLE) -> list[ClassReport]:
    """Per-class mean IoU over the scope. image_ids optionally restricts the
    report to a subset (e.g. a job's eval split)."""
    scope_images = []
    for folder_id in scope.folder_ids:
        for image in store.images_in_folder(folder_id):
            if image_ids is None or image.image_id in image_ids:
                scope_images.append(image)

    preds = [p for p in predictions
             if p.model_id == model_id and p.training_instance == training_instance]
    by_image: dict[str, list[ModelPrediction]] = {}
    for p in preds:
        by_image.setdefault(p.image_id, []).append(p)
    if not any(im.image_id in by_image for im in scope_images):
        raise NoPredictions(
            f"no predictions for model {model_id!r} instance {training_instance} in scope")

    matched_ious: dict[str, list[float]] = {}
    missed: dict[str, int] = {}
    spurious: dict[str, int] = {}

    for image in scope_images:
        gts = store.accepted_human_annotations(image.image_id)
        if scope.label_filter is not None:
            gts = [g for g in gts if g.label_id in scope.label_filter]
        image_preds = by_image.get(image.image_id, [])
        if scope.label_filter is not None:
            image_preds = [p for p in image_preds if p.label_id in scope.label_filter]
        if not gts and not image_preds:
            continue
        grid = GridSpec(image.width, image.height, supersample)
        result = match_predictions(gts, image_preds, grid, match_min_iou)
        gt_by_id = {g.annotation_id: g for g in gts}
        pred_by_id = {p.prediction_id: p for p in image_preds}
        for ann_id, _pred_id, value in result.pairs:
            matched_ious.setdefault(gt_by_id[ann_id].label_id, []).append(value)
        for ann_id in result.unmatched_ground_truth:
            label = gt_by_id[ann_id].label_id
            missed[label] = missed.get(label, 0) + 1
        for pred_id in result.unmatched_predictions:
            label = pred_by_id[pred_id].label_id
            spurious[label] = spurious.get(label, 0) + 1

    reports = []
    for label_id in sorted(set(matched_ious) | set(missed) | set(spurious)):
        ious = matched_ious.get(label_id, [])
        n_missed = missed.get(label_id, 0)
        denom = len(ious) + n_missed
        mean = math.fsum(ious) / denom if denom else 0.0
        reports.append(ClassReport(
            model_id=model_id,
            label_id=label_id,
            mean_iou=mean,
            matched=len(ious),
            missed_ground_truth=n_missed,
            spurious_predictions=spurious.get(label_id, 0),
            training_instance=training_instance,
        ))
    return reports


# --- timelines ------------------------------------------------------------------
# Records are MetricsRecord-shaped objects (gateway posts them): attributes
# model_id, label_id, training_instance, mean_iou, sample_count, recorded_at.

def model_timeline(records: Iterable, model_id: str) -> dict:
    """Chronological (training_instance, overall mean IoU) series.

    Per instance: an explicit ALL record wins (latest recorded); otherwise
    per-class records aggregate weighted by sample_count.
    """
    mine = [r for r in records if r.model_id == model_id]
    if not mine:
        raise NoData(f"no metrics recorded for model {model_id!r}")
    by_instance: dict[int, list] = {}
    for r in mine:
        by_instance.setdefault(r.training_instance, []).append(r)
    series = []
    for instance in sorted(by_instance):
        recs = by_instance[instance]
        alls = [r for r in recs if r.label_id == ALL_CLASSES]
        if alls:
            point = max(alls, key=lambda r: r.recorded_at).mean_iou
        else:
            total = sum(r.sample_count for r in recs)
            if total > 0:
                point = math.fsum(r.mean_iou * r.sample_count for r in recs) / total
            else:
                point = math.fsum(r.mean_iou for r in recs) / len(recs)
        series.append((instance, point))
    return {"series": series, "plateaued": detect_plateau([v for _, v in series])}


def class_timeline(records: Iterable, model_id: str, label_id: str) -> dict:
    mine = [r for r in records
            if r.model_id == model_id and r.label_id == label_id]
    if not mine:
        raise NoData(f"no metrics for model {model_id!r} class {label_id!r}")
    by_instance: dict[int, list] = {}
    for r in mine:
        by_instance.setdefault(r.training_instance, []).append(r)
    series = [(i, max(by_instance[i], key=lambda r: r.recorded_at).mean_iou)
              for i in sorted(by_instance)]
    return {"series": series, "plateaued": detect_plateau([v for _, v in series])}


def detect_plateau(values: Sequence[float], window: int = 3,
                   threshold: float = 0.01) -> bool:
    """True when every delta across the last `window` points is below threshold."""
    if len(values) < window:
        return False
    tail = values[-window:]
    return all(abs(b - a) < threshold for a, b in zip(tail, tail[1:]))
