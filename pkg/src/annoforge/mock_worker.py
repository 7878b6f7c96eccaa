"""Deterministic in-process worker for end-to-end testing.

Stands in for a real training framework: for every eval-split image it
emits the ground-truth polygons displaced by seeded uniform noise, with a
confidence derived from the noise level, then posts per-class mean IoU of
its own predictions (computed with the same geometry engine the evaluation
module uses) and completes the job.
"""

from __future__ import annotations

import math
import random
from typing import Optional

from .domain import AnnotationStore
from .errors import IllegalState
from .gateway import ModelWorkerGateway, TrainingJob
from .geometry import DEFAULT_SUPERSAMPLE, GridSpec, PixelRect, Polygon, clamp_point_to_rect, iou
from .pipeline import resolve_selection


def run(gateway: ModelWorkerGateway, noise_scale: float, seed: int,
        job_id: Optional[str] = None, worker_id: str = "mock-worker") -> dict:
    """Claim a job (a specific one, or the oldest pending), run it, return a
    summary: {job_id, predictions: [...], metrics: [...], results: [...]}."""
    if job_id is not None:
        job = gateway.claim_job(job_id, worker_id)
    else:
        job = gateway.claim_next_job(worker_id)
        if job is None:
            raise IllegalState("no pending job to claim")
    return run_claimed(gateway, job, noise_scale, seed)


def run_claimed(gateway: ModelWorkerGateway, job: TrainingJob,
                noise_scale: float, seed: int) -> dict:
    store: AnnotationStore = gateway.store
    rng = random.Random(f"mock:{seed}")
    base_confidence = min(max(1.0 - noise_scale / 20.0, 0.0), 1.0)

    resolved = resolve_selection(store, job.selection)
    pred_docs: list[dict] = []
    per_class_ious: dict[str, list[float]] = {}

    for image_id in sorted(job.split.eval):
        anns = resolved.get(image_id, [])
        if not anns:
            continue
        image = store.images[image_id]
        bounds = PixelRect(0, 0, image.width, image.height)
        grid = GridSpec(image.width, image.height, DEFAULT_SUPERSAMPLE)
        for ann in sorted(anns, key=lambda a: a.annotation_id):
            noisy = [
                clamp_point_to_rect(
                    (x + rng.uniform(-noise_scale, noise_scale),
                     y + rng.uniform(-noise_scale, noise_scale)),
                    bounds,
                )
                for x, y in ann.polygon.vertices
            ]
            polygon = Polygon.from_points(noisy)
            confidence = min(max(base_confidence + rng.uniform(-0.05, 0.05), 0.0), 1.0)
            pred_docs.append({
                "image_id": image_id,
                "label": ann.label_id,
                "polygon": polygon.to_json(),
                "confidence": confidence,
            })
            value = iou(polygon, ann.polygon, grid)
            per_class_ious.setdefault(ann.label_id, []).append(value)

    results = gateway.post_predictions(job.job_id, pred_docs)

    metric_docs = [
        {
            "label_id": label_id,
            "mean_iou": math.fsum(values) / len(values),
            "sample_count": len(values),
        }
        for label_id, values in sorted(per_class_ious.items())
    ]
    accepted = gateway.post_metrics(job.job_id, metric_docs) if metric_docs else 0
    gateway.complete_job(job.job_id, "completed")

    return {
        "job_id": job.job_id,
        "model_id": job.model_id,
        "training_instance": job.training_instance,
        "predictions_posted": len(pred_docs),
        "metrics_posted": accepted,
        "results": results,
        "metrics": metric_docs,
    }
