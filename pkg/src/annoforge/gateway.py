"""Model-agnostic training lifecycle: registry, pull-based job queue,
metrics/prediction ingestion.

Workers poll for jobs, post metrics and predictions while running, and
complete or fail the job. The job table is one serialization domain, so
claiming is exactly-once under concurrent pollers; claimed jobs that stop
making progress fall back to pending after an abandonment timeout. All
gateway state is journaled and replayed on boot.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .active_learning import ActiveLearningScheduler, ModelPrediction
from .clock import Clock
from .domain import AnnotationStore
from .errors import (
    AnnoforgeError,
    DuplicateModel,
    IllegalState,
    MissingConfigKey,
    UnknownClass,
    UnknownJob,
    UnknownModel,
    UnsupportedFormat,
    ValidationError,
)
from .evaluation import ALL_CLASSES
from .geometry import Polygon, RasterMask, mask_to_rle, rle_to_mask
from .journal import Journal
from .pipeline import FORMATS, DatasetSelection, SplitResult, export
from .pipeline import split as compute_split

REQUIRED_CONFIG_KEYS = ("learning_rate", "epochs")
DEFAULT_ABANDON_SECONDS = 60 * 60.0

JOB_PENDING = "pending"
JOB_CLAIMED = "claimed"
JOB_RUNNING = "running"
JOB_COMPLETED = "completed"
JOB_FAILED = "failed"
LIVE_JOB_STATES = (JOB_CLAIMED, JOB_RUNNING)

# inert registry seed data: common pretrained detector configurations
DEFAULT_MODEL_SEEDS = (
    ("ssd_mobilenet_v1_coco", "coco", {"learning_rate": 0.004, "epochs": 50}),
    ("ssd_mobilenet_v2_coco", "coco", {"learning_rate": 0.004, "epochs": 50}),
    ("mask_rcnn_inception_v2_coco", "coco", {"learning_rate": 0.002, "epochs": 40}),
    ("mask_rcnn_resnet50_atrous_coco", "coco", {"learning_rate": 0.002, "epochs": 40}),
)


@dataclass
class ModelEntry:
    model_id: str
    display_name: str
    adapter_format: str
    config: dict[str, Any]

    def to_json(self) -> dict:
        return {"model_id": self.model_id, "display_name": self.display_name,
                "adapter_format": self.adapter_format, "config": self.config}


@dataclass
class TrainingJob:
    job_id: str
    model_id: str
    selection: DatasetSelection
    split: SplitResult
    config: dict[str, Any]
    state: str
    training_instance: int
    created_at: float
    updated_at: float
    bundle_dir: str
    adapter_format: str
    worker_id: Optional[str] = None
    failure_reason: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "model_id": self.model_id,
            "selection": self.selection.to_json(),
            "split": self.split.to_json(),
            "config": self.config,
            "state": self.state,
            "training_instance": self.training_instance,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "bundle_dir": self.bundle_dir,
            "adapter_format": self.adapter_format,
            "worker_id": self.worker_id,
            "failure_reason": self.failure_reason,
        }


@dataclass(frozen=True)
class MetricsRecord:
    job_id: str
    model_id: str
    label_id: str  # a label id or ALL
    training_instance: int
    mean_iou: float
    sample_count: int
    recorded_at: float

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "model_id": self.model_id,
            "label_id": self.label_id,
            "training_instance": self.training_instance,
            "mean_iou": self.mean_iou,
            "sample_count": self.sample_count,
            "recorded_at": self.recorded_at,
        }


def prediction_to_json(pred: ModelPrediction) -> dict:
    doc = {
        "prediction_id": pred.prediction_id,
        "image_id": pred.image_id,
        "model_id": pred.model_id,
        "label": pred.label_id,
        "confidence": pred.confidence,
        "training_instance": pred.training_instance,
        "produced_at": pred.produced_at,
    }
    if isinstance(pred.geometry, Polygon):
        doc["polygon"] = pred.geometry.to_json()
    else:
        doc["mask_rle"] = mask_to_rle(pred.geometry)
    return doc


def prediction_from_json(doc: dict) -> ModelPrediction:
    if "polygon" in doc and doc["polygon"] is not None:
        geometry: Polygon | RasterMask = Polygon.from_points(doc["polygon"])
    elif "mask_rle" in doc and doc["mask_rle"] is not None:
        geometry = rle_to_mask(doc["mask_rle"])
    else:
        raise ValidationError("prediction needs a polygon or a mask_rle")
    return ModelPrediction.create(
        image_id=doc["image_id"],
        model_id=doc["model_id"],
        label_id=doc["label"],
        geometry=geometry,
        confidence=float(doc["confidence"]),
        training_instance=int(doc["training_instance"]),
        produced_at=float(doc["produced_at"]),
        prediction_id=doc.get("prediction_id"),
    )


class ModelWorkerGateway:
    def __init__(self, store: AnnotationStore, scheduler: ActiveLearningScheduler,
                 clock: Clock, jobs_dir: Path | str,
                 journal_path: Optional[Path | str] = None,
                 abandon_seconds: float = DEFAULT_ABANDON_SECONDS):
        self.store = store
        self.scheduler = scheduler
        self.clock = clock
        self.jobs_dir = Path(jobs_dir)
        self.abandon_seconds = abandon_seconds
        self._lock = threading.Lock()
        self.models: dict[str, ModelEntry] = {}
        self.jobs: dict[str, TrainingJob] = {}
        self.metrics_records: list[MetricsRecord] = []
        self._instance_counters: dict[str, int] = {}
        self._journal: Optional[Journal] = None
        if journal_path is not None:
            self._replay(Path(journal_path))
            self._journal = Journal(journal_path)

    # --- journal -----------------------------------------------------------------

    def _replay(self, path: Path) -> None:
        for event in Journal.replay(path):
            kind = event.get("type")
            if kind == "model":
                entry = ModelEntry(
                    model_id=event["model_id"],
                    display_name=event["display_name"],
                    adapter_format=event["adapter_format"],
                    config=event["config"],
                )
                self.models[entry.model_id] = entry
            elif kind == "job":
                job = TrainingJob(
                    job_id=event["job_id"],
                    model_id=event["model_id"],
                    selection=DatasetSelection.from_json(event["selection"]),
                    split=SplitResult.from_json(event["split"]),
                    config=event["config"],
                    state=event["state"],
                    training_instance=event["training_instance"],
                    created_at=event["created_at"],
                    updated_at=event["updated_at"],
                    bundle_dir=event["bundle_dir"],
                    adapter_format=event["adapter_format"],
                )
                self.jobs[job.job_id] = job
                counter = self._instance_counters.get(job.model_id, 0)
                self._instance_counters[job.model_id] = max(counter, job.training_instance)
            elif kind == "job_state":
                job = self.jobs.get(event["job_id"])
                if job is not None:
                    job.state = event["state"]
                    job.updated_at = event["at"]
                    job.worker_id = event.get("worker_id", job.worker_id)
                    job.failure_reason = event.get("reason", job.failure_reason)
            elif kind == "metrics":
                for doc in event["records"]:
                    self.metrics_records.append(MetricsRecord(**doc))
            elif kind == "prediction":
                pred = prediction_from_json(event["prediction"])
                self.scheduler.restore_prediction(pred, event["action"])

    def _log(self, record: dict) -> None:
        if self._journal is not None:
            self._journal.append(record)

    # --- registry -----------------------------------------------------------------

    def register_model(self, display_name: str, adapter_format: str,
                       config: dict[str, Any]) -> ModelEntry:
        if adapter_format not in FORMATS:
            raise UnsupportedFormat(
                f"adapter format must be one of {FORMATS}, got {adapter_format!r}")
        for key in REQUIRED_CONFIG_KEYS:
            if key not in config:
                raise MissingConfigKey(f"model config is missing {key!r}")
        with self._lock:
            if any(m.display_name == display_name for m in self.models.values()):
                raise DuplicateModel(f"model {display_name!r} already registered")
            entry = ModelEntry(
                model_id=f"mdl-{uuid.uuid4().hex[:8]}",
                display_name=display_name,
                adapter_format=adapter_format,
                config=dict(config),
            )
            self.models[entry.model_id] = entry
            self._log({"type": "model", **entry.to_json()})
            return entry

    def seed_default_models(self) -> list[ModelEntry]:
        created = []
        existing = {m.display_name for m in self.models.values()}
        for name, fmt, config in DEFAULT_MODEL_SEEDS:
            if name not in existing:
                created.append(self.register_model(name, fmt, config))
        return created

    def require_model(self, model_id: str) -> ModelEntry:
        entry = self.models.get(model_id)
        if entry is None:
            raise UnknownModel(f"no model {model_id!r}")
        return entry

    def require_job(self, job_id: str) -> TrainingJob:
        job = self.jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no job {job_id!r}")
        return job

    # --- job lifecycle ---------------------------------------------------------------

    def create_training_job(self, model_id: str, selection: DatasetSelection,
                            ratio: float, seed: int) -> TrainingJob:
        entry = self.require_model(model_id)
        result = compute_split(self.store, selection, ratio, seed)
        now = self.clock.now()
        with self._lock:
            instance = self._instance_counters.get(model_id, 0) + 1
            self._instance_counters[model_id] = instance
            job_id = f"job-{uuid.uuid4().hex[:12]}"
            bundle_dir = self.jobs_dir / job_id / "bundle"
            job = TrainingJob(
                job_id=job_id,
                model_id=model_id,
                selection=selection,
                split=result,
                config=dict(entry.config),
                state=JOB_PENDING,
                training_instance=instance,
                created_at=now,
                updated_at=now,
                bundle_dir=str(bundle_dir),
                adapter_format=entry.adapter_format,
            )
            export(self.store, selection, result, entry.adapter_format, bundle_dir)
            self.jobs[job_id] = job
            self._log({"type": "job", **job.to_json()})
            return job

    def _requeue_abandoned_locked(self, now: float) -> int:
        count = 0
        for job in self.jobs.values():
            if job.state in LIVE_JOB_STATES and now - job.updated_at > self.abandon_seconds:
                job.state = JOB_PENDING
                job.worker_id = None
                job.updated_at = now
                self._log({"type": "job_state", "job_id": job.job_id,
                           "state": JOB_PENDING, "at": now})
                count += 1
        return count

    def requeue_abandoned(self, now: Optional[float] = None) -> int:
        now = self.clock.now() if now is None else now
        with self._lock:
            return self._requeue_abandoned_locked(now)

    def claim_next_job(self, worker_id: str) -> Optional[TrainingJob]:
        now = self.clock.now()
        with self._lock:
            self._requeue_abandoned_locked(now)
            pending = [j for j in self.jobs.values() if j.state == JOB_PENDING]
            if not pending:
                return None
            job = min(pending, key=lambda j: (j.created_at, j.job_id))
            self._claim_locked(job, worker_id, now)
            return job

    def claim_job(self, job_id: str, worker_id: str) -> TrainingJob:
        now = self.clock.now()
        with self._lock:
            job = self.require_job(job_id)
            if job.state != JOB_PENDING:
                raise IllegalState(f"job {job_id} is {job.state}, not pending")
            self._claim_locked(job, worker_id, now)
            return job

    def _claim_locked(self, job: TrainingJob, worker_id: str, now: float) -> None:
        job.state = JOB_CLAIMED
        job.worker_id = worker_id
        job.updated_at = now
        self._log({"type": "job_state", "job_id": job.job_id, "state": JOB_CLAIMED,
                   "worker_id": worker_id, "at": now})

    def _touch_running(self, job: TrainingJob, now: float) -> None:
        if job.state not in LIVE_JOB_STATES:
            raise IllegalState(
                f"job {job.job_id} is {job.state}; metrics/predictions need a "
                f"claimed or running job")
        if job.state != JOB_RUNNING:
            job.state = JOB_RUNNING
            self._log({"type": "job_state", "job_id": job.job_id,
                       "state": JOB_RUNNING, "at": now})
        job.updated_at = now

    # --- worker posts -----------------------------------------------------------------

    def post_metrics(self, job_id: str, records: list[dict]) -> int:
        now = self.clock.now()
        with self._lock:
            job = self.require_job(job_id)
            self._touch_running(job, now)
            parsed = []
            for doc in records:
                label_id = doc.get("label_id", ALL_CLASSES)
                if label_id != ALL_CLASSES and label_id not in self.store.hierarchy.labels:
                    raise UnknownClass(f"no label {label_id!r}")
                mean_iou = float(doc["mean_iou"])
                if not 0.0 <= mean_iou <= 1.0:
                    raise ValidationError(f"mean_iou {mean_iou} outside [0, 1]")
                sample_count = int(doc.get("sample_count", 0))
                if sample_count < 0:
                    raise ValidationError("sample_count must be >= 0")
                parsed.append(MetricsRecord(
                    job_id=job_id,
                    model_id=job.model_id,
                    label_id=label_id,
                    training_instance=job.training_instance,
                    mean_iou=mean_iou,
                    sample_count=sample_count,
                    recorded_at=now,
                ))
            self.metrics_records.extend(parsed)
            self._log({"type": "metrics", "records": [r.to_json() for r in parsed]})
            return len(parsed)

    def post_predictions(self, job_id: str, pred_docs: list[dict]) -> list[dict]:
        now = self.clock.now()
        with self._lock:
            job = self.require_job(job_id)
            self._touch_running(job, now)
        results = []
        for doc in pred_docs:
            try:
                pred = prediction_from_json({
                    **doc,
                    "model_id": job.model_id,
                    "training_instance": job.training_instance,
                    "produced_at": now,
                })
                action = self.scheduler.ingest_prediction(pred)
                self._log({"type": "prediction",
                           "prediction": prediction_to_json(pred),
                           "action": action.kind.value})
                results.append(action.to_json())
            except AnnoforgeError as exc:
                results.append({"error": exc.code, "message": str(exc)})
        return results

    def complete_job(self, job_id: str, outcome: str,
                     reason: Optional[str] = None) -> TrainingJob:
        now = self.clock.now()
        if outcome not in (JOB_COMPLETED, JOB_FAILED):
            raise ValidationError(f"outcome must be completed or failed, got {outcome!r}")
        with self._lock:
            job = self.require_job(job_id)
            if job.state not in LIVE_JOB_STATES:
                raise IllegalState(f"job {job_id} is {job.state}; cannot complete")
            job.state = outcome
            job.failure_reason = reason if outcome == JOB_FAILED else None
            job.updated_at = now
            self._log({"type": "job_state", "job_id": job_id, "state": outcome,
                       "reason": job.failure_reason, "at": now})
            return job

    # --- queries -------------------------------------------------------------------

    def jobs_for_model(self, model_id: str) -> list[TrainingJob]:
        return sorted((j for j in self.jobs.values() if j.model_id == model_id),
                      key=lambda j: j.training_instance)

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()
