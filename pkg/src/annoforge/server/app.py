"""REST API composing the platform modules.

Handlers are thin: every business rule lives in a module that is unit-tested
directly; routes only translate between HTTP and module calls, and map
AnnoforgeError subclasses to status codes in one place.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

from fastapi import Body, FastAPI, Query, Response
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .. import evaluation
from ..domain import AnnotationStatus, Author
from ..errors import AnnoforgeError, LockExpired, UnknownImage, ValidationError
from ..geometry import Polygon
from ..pipeline import DatasetSelection, export
from ..pipeline import split as compute_split
from .state import AppState


class NextImageRequest(BaseModel):
    user_id: str


class SubmitAnnotationRequest(BaseModel):
    lease_token: str
    polygon: list[list[float]]
    label_id: str
    user_id: str


class QCDecisionRequest(BaseModel):
    reviewer: str
    reason: str = ""


class QCEditRequest(BaseModel):
    reviewer: str
    polygon: Optional[list[list[float]]] = None
    label_id: Optional[str] = None


class RegisterModelRequest(BaseModel):
    display_name: str
    adapter_format: str
    config: dict[str, Any]


class CreateJobRequest(BaseModel):
    model_id: str
    folder_ids: list[str]
    label_filter: Optional[list[str]] = None
    include_auto_accepted: Optional[bool] = None
    ratio: Optional[float] = None
    seed: Optional[int] = None


class CompleteJobRequest(BaseModel):
    outcome: str
    reason: Optional[str] = None


class ExportRequest(BaseModel):
    format: str
    folder_ids: list[str]
    label_filter: Optional[list[str]] = None
    include_auto_accepted: Optional[bool] = None
    ratio: Optional[float] = None
    seed: Optional[int] = None
    copy_images: bool = False
    out_name: Optional[str] = None


def _lease_json(lease, now: float) -> dict:
    return {
        "lease_token": lease.lease_token,
        "image_id": lease.image_id,
        "holder": lease.holder,
        "acquired_at": lease.acquired_at,
        "last_activity": lease.last_activity,
        "ttl_seconds": lease.ttl,
        "expires_at": lease.last_activity + lease.ttl,
        "now": now,
    }


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="annoforge", version="0.1.0")
    store = state.store
    locks = state.locks
    scheduler = state.scheduler
    gateway = state.gateway
    config = state.config

    @app.exception_handler(AnnoforgeError)
    async def _on_error(_request, exc: AnnoforgeError):
        return JSONResponse(status_code=exc.http_status,
                            content={"error": exc.code, "message": str(exc)})

    def _selection(folder_ids, label_filter, include_auto_accepted) -> DatasetSelection:
        include = (config.trust_auto_accept if include_auto_accepted is None
                   else include_auto_accepted)
        return DatasetSelection.create(folder_ids, label_filter, include)

    # --- folders and annotation flow ------------------------------------------

    @app.get("/api/folders")
    def list_folders():
        now = state.clock.now()
        locks.expire_stale(now)
        return store.folder_summaries(leased_ids=locks.leased_image_ids(now))

    @app.post("/api/folders/{folder_id}/next-image")
    def next_image(folder_id: str, body: NextImageRequest):
        now = state.clock.now()
        order = scheduler.rank_folder(folder_id)
        acquired = locks.acquire_next(folder_id, body.user_id, now, order)
        if acquired is None:
            return Response(status_code=204)
        image, lease = acquired
        return {
            "image": {**image.to_json(), "url": f"/files/{image.file_path}"},
            "lease": _lease_json(lease, now),
            "hierarchy": store.hierarchy.raw,
        }

    @app.post("/api/leases/{token}/heartbeat")
    def lease_heartbeat(token: str):
        now = state.clock.now()
        lease = locks.heartbeat(token, now)
        return _lease_json(lease, now)

    @app.delete("/api/leases/{token}")
    def lease_release(token: str):
        released = locks.release(token, state.clock.now())
        return {"released": released}

    @app.post("/api/images/{image_id}/annotations", status_code=201)
    def submit_annotation(image_id: str, body: SubmitAnnotationRequest):
        now = state.clock.now()
        if not locks.validate_token(body.lease_token, image_id, now):
            raise LockExpired(
                "lease token is stale for this image; re-acquire before submitting")
        polygon = Polygon.from_points(body.polygon)
        ann = store.create_annotation(image_id, polygon, body.label_id,
                                      Author.human(body.user_id))
        locks.release(body.lease_token, now)
        return ann.to_json()

    @app.get("/api/images/{image_id}/annotations")
    def list_annotations(image_id: str):
        return [a.to_json() for a in store.annotations_for_image(image_id)]

    # --- hierarchy and references -----------------------------------------------

    @app.get("/api/hierarchy")
    def hierarchy():
        return store.hierarchy.raw

    @app.get("/api/hierarchy/children")
    def hierarchy_children(node_id: Optional[str] = Query(default=None)):
        return [
            {"node_id": n.node_id, "name": n.name, "parent": n.parent,
             "children": list(n.children), "is_leaf": n.is_leaf}
            for n in store.hierarchy_children(node_id)
        ]

    @app.get("/api/labels/{label_id}/references")
    def label_references(label_id: str):
        return [
            {**ref.to_json(), "url": f"/files/{ref.file_path}"}
            for ref in store.reference_images_for(label_id)
        ]

    # --- quality check -------------------------------------------------------------

    @app.get("/api/qc")
    def qc_list(folder: Optional[str] = None, status: Optional[str] = None,
                author_kind: Optional[str] = None):
        parsed_status = AnnotationStatus(status) if status else None
        return [a.to_json() for a in
                store.qc_list(folder=folder, status=parsed_status,
                              author_kind=author_kind)]

    @app.post("/api/qc/{annotation_id}/accept")
    def qc_accept(annotation_id: str, body: QCDecisionRequest):
        return store.qc_accept(annotation_id, body.reviewer).to_json()

    @app.post("/api/qc/{annotation_id}/reject")
    def qc_reject(annotation_id: str, body: QCDecisionRequest):
        return store.qc_reject(annotation_id, body.reviewer, body.reason).to_json()

    @app.patch("/api/qc/{annotation_id}")
    def qc_edit(annotation_id: str, body: QCEditRequest):
        polygon = Polygon.from_points(body.polygon) if body.polygon else None
        return store.qc_edit(annotation_id, body.reviewer,
                             new_polygon=polygon, new_label=body.label_id).to_json()

    # --- models and training jobs -----------------------------------------------------

    @app.get("/api/models")
    def list_models():
        return [m.to_json() for m in
                sorted(gateway.models.values(), key=lambda m: m.display_name)]

    @app.post("/api/models", status_code=201)
    def register_model(body: RegisterModelRequest):
        entry = gateway.register_model(body.display_name, body.adapter_format,
                                       body.config)
        return entry.to_json()

    @app.post("/api/training/jobs", status_code=201)
    def create_job(body: CreateJobRequest):
        selection = _selection(body.folder_ids, body.label_filter,
                               body.include_auto_accepted)
        ratio = body.ratio if body.ratio is not None else config.split_ratio
        seed = body.seed if body.seed is not None else config.rng_seed
        job = gateway.create_training_job(body.model_id, selection, ratio, seed)
        return job.to_json()

    @app.get("/api/training/jobs/{job_id}")
    def get_job(job_id: str):
        return gateway.require_job(job_id).to_json()

    # --- worker wire protocol -----------------------------------------------------------

    @app.get("/api/worker/jobs/next")
    def worker_next_job(worker_id: str):
        job = gateway.claim_next_job(worker_id)
        if job is None:
            return Response(status_code=204)
        return job.to_json()

    @app.post("/api/worker/jobs/{job_id}/metrics")
    def worker_post_metrics(job_id: str, payload: dict = Body(...)):
        records = payload.get("records")
        if not isinstance(records, list):
            raise ValidationError("body must contain a 'records' list")
        return {"accepted": gateway.post_metrics(job_id, records)}

    @app.post("/api/worker/jobs/{job_id}/predictions")
    def worker_post_predictions(job_id: str, payload: dict = Body(...)):
        preds = payload.get("predictions")
        if not isinstance(preds, list):
            raise ValidationError("body must contain a 'predictions' list")
        return {"results": gateway.post_predictions(job_id, preds)}

    @app.post("/api/worker/jobs/{job_id}/complete")
    def worker_complete(job_id: str, body: CompleteJobRequest):
        return gateway.complete_job(job_id, body.outcome, body.reason).to_json()

    # --- metrics, reports, exports --------------------------------------------------------

    @app.get("/api/metrics/models/{model_id}")
    def metrics_model(model_id: str):
        gateway.require_model(model_id)
        timeline = evaluation.model_timeline(gateway.metrics_records, model_id)
        return {
            "model_id": model_id,
            "series": [{"training_instance": i, "mean_iou": v}
                       for i, v in timeline["series"]],
            "plateaued": timeline["plateaued"],
        }

    @app.get("/api/metrics/models/{model_id}/classes/{label_id}")
    def metrics_class(model_id: str, label_id: str):
        gateway.require_model(model_id)
        timeline = evaluation.class_timeline(gateway.metrics_records, model_id, label_id)
        return {
            "model_id": model_id,
            "label_id": label_id,
            "series": [{"training_instance": i, "mean_iou": v}
                       for i, v in timeline["series"]],
            "plateaued": timeline["plateaued"],
        }

    @app.get("/api/reports/models/{model_id}")
    def class_report(model_id: str, training_instance: Optional[int] = None,
                     eval_only: bool = True):
        gateway.require_model(model_id)
        preds = scheduler.predictions_for(model_id)
        if training_instance is None:
            if not preds:
                return {"model_id": model_id, "rows": []}
            training_instance = max(p.training_instance for p in preds)
        image_ids = None
        if eval_only:
            for job in gateway.jobs_for_model(model_id):
                if job.training_instance == training_instance:
                    image_ids = set(job.split.eval)
                    break
        scope = DatasetSelection.create(store.folder_ids or [])
        rows = evaluation.per_class_report(
            store, preds, model_id, training_instance, scope,
            image_ids=image_ids, supersample=config.supersample)
        return {"model_id": model_id, "training_instance": training_instance,
                "rows": [r.to_json() for r in rows]}

    @app.post("/api/exports", status_code=201)
    def create_export(body: ExportRequest):
        selection = _selection(body.folder_ids, body.label_filter,
                               body.include_auto_accepted)
        ratio = body.ratio if body.ratio is not None else config.split_ratio
        seed = body.seed if body.seed is not None else config.rng_seed
        result = compute_split(store, selection, ratio, seed)
        name = body.out_name or f"{body.format}-seed{seed}"
        out_dir = Path(config.data_root) / "exports" / name
        manifest = export(store, selection, result, body.format, out_dir,
                          copy_images=body.copy_images)
        return {"out_dir": str(out_dir), "manifest": manifest,
                "split": result.to_json()}

    # --- static files ------------------------------------------------------------------

    @app.get("/files/{file_path:path}")
    def serve_file(file_path: str):
        root = Path(config.data_root).resolve()
        target = (root / file_path).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            raise UnknownImage(f"no such file {file_path!r}")
        return FileResponse(target)

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
