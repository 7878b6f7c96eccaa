"""Command-line entry points: serve, export, report, mock-worker, seed-demo."""

from __future__ import annotations

import csv
import io
import json
import sys
import threading
from pathlib import Path
from typing import Optional

import click

from . import evaluation, mock_worker
from .demo import seed_demo_root
from .errors import AnnoforgeError
from .pipeline import DatasetSelection, export as run_export, split as compute_split
from .server import AppState, create_app, load_config


def _boot(config_path: Optional[str], data_root: Optional[str],
          extra: Optional[dict] = None) -> AppState:
    overrides = dict(extra or {})
    if data_root:
        overrides["data_root"] = data_root
    config = load_config(config_path, overrides)
    return AppState.boot(config)


@click.group()
def main():
    """annoforge: multi-user image annotation platform."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML config file")
@click.option("--data-root", type=click.Path(), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Directory with the built web client")
@click.option("--lock-ttl-minutes", type=float, default=None)
@click.option("--auto-accept-threshold", type=float, default=None)
@click.option("--uncertain-low", type=float, default=None)
@click.option("--uncertain-high", type=float, default=None)
@click.option("--unpredicted-score", type=float, default=None)
@click.option("--split-ratio", type=float, default=None)
@click.option("--rng-seed", type=int, default=None)
@click.option("--trust-auto-accept", is_flag=True, default=None)
@click.option("--job-abandon-minutes", type=float, default=None)
def serve(config_path, data_root, host, port, ui_dir, lock_ttl_minutes,
          auto_accept_threshold, uncertain_low, uncertain_high,
          unpredicted_score, split_ratio, rng_seed, trust_auto_accept,
          job_abandon_minutes):
    """Run the HTTP server."""
    import uvicorn

    state = _boot(config_path, data_root, {
        "host": host, "port": port, "ui_dir": ui_dir,
        "lock_ttl_minutes": lock_ttl_minutes,
        "auto_accept_threshold": auto_accept_threshold,
        "uncertain_low": uncertain_low,
        "uncertain_high": uncertain_high,
        "unpredicted_score": unpredicted_score,
        "split_ratio": split_ratio,
        "rng_seed": rng_seed,
        "trust_auto_accept": trust_auto_accept,
        "job_abandon_minutes": job_abandon_minutes,
    })
    app = create_app(state)

    def sweeper():
        import time
        while True:
            time.sleep(60)
            state.locks.expire_stale(state.clock.now())
            state.gateway.requeue_abandoned()

    threading.Thread(target=sweeper, daemon=True).start()
    try:
        uvicorn.run(app, host=state.config.host, port=state.config.port)
    finally:
        state.shutdown()


def _load_selection(state: AppState, selection_path: Optional[str],
                    folders: tuple[str, ...]) -> DatasetSelection:
    if selection_path:
        doc = json.loads(Path(selection_path).read_text(encoding="utf-8"))
        return DatasetSelection.from_json(doc)
    folder_ids = list(folders) if folders else list(state.store.folder_ids)
    return DatasetSelection.create(
        folder_ids, include_auto_accepted=state.config.trust_auto_accept)


@main.command("export")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data-root", type=click.Path(), default=None)
@click.option("--selection", "selection_path", type=click.Path(exists=True),
              default=None, help="JSON selection document")
@click.option("--folder", "folders", multiple=True,
              help="Folder id (repeatable); default: all folders")
@click.option("--format", "fmt", type=click.Choice(["canonical", "coco", "voc"]),
              default="canonical")
@click.option("--ratio", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--copy-images", is_flag=True, default=False)
def export_cmd(config_path, data_root, selection_path, folders, fmt, ratio, seed,
               out_dir, copy_images):
    """Split the selection and write a train/eval export bundle."""
    state = _boot(config_path, data_root)
    try:
        selection = _load_selection(state, selection_path, folders)
        ratio = ratio if ratio is not None else state.config.split_ratio
        seed = seed if seed is not None else state.config.rng_seed
        result = compute_split(state.store, selection, ratio, seed)
        manifest = run_export(state.store, selection, result, fmt, out_dir,
                              copy_images=copy_images)
    except AnnoforgeError as exc:
        raise click.ClickException(f"{exc.code}: {exc}")
    finally:
        state.shutdown()
    click.echo(json.dumps({"out_dir": str(out_dir), "counts": manifest["counts"]},
                          indent=2, sort_keys=True))


@main.command("mock-worker")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data-root", type=click.Path(), default=None)
@click.option("--noise", type=float, default=0.0, help="Vertex noise in pixels")
@click.option("--seed", type=int, default=0)
@click.option("--job-id", default=None, help="Claim a specific pending job")
@click.option("--create-job", is_flag=True, default=False,
              help="Create a job first (needs --model)")
@click.option("--model", "model_id", default=None)
@click.option("--folder", "folders", multiple=True)
def mock_worker_cmd(config_path, data_root, noise, seed, job_id, create_job,
                    model_id, folders):
    """Run the deterministic mock worker against a pending training job."""
    state = _boot(config_path, data_root)
    try:
        if create_job:
            if not model_id:
                raise click.ClickException("--create-job requires --model")
            selection = _load_selection(state, None, folders)
            job = state.gateway.create_training_job(
                model_id, selection, state.config.split_ratio, seed)
            job_id = job.job_id
        summary = mock_worker.run(state.gateway, noise, seed, job_id=job_id)
    except AnnoforgeError as exc:
        raise click.ClickException(f"{exc.code}: {exc}")
    finally:
        state.shutdown()
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


@main.command("report")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data-root", type=click.Path(), default=None)
@click.option("--model", "model_id", required=True)
@click.option("--training-instance", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def report_cmd(config_path, data_root, model_id, training_instance, fmt):
    """Per-class mean IoU rows for one model (the evaluation table)."""
    state = _boot(config_path, data_root)
    try:
        state.gateway.require_model(model_id)
        preds = state.scheduler.predictions_for(model_id)
        if not preds:
            raise click.ClickException(f"no predictions recorded for {model_id}")
        if training_instance is None:
            training_instance = max(p.training_instance for p in preds)
        image_ids = None
        for job in state.gateway.jobs_for_model(model_id):
            if job.training_instance == training_instance:
                image_ids = set(job.split.eval)
                break
        scope = DatasetSelection.create(state.store.folder_ids)
        rows = evaluation.per_class_report(
            state.store, preds, model_id, training_instance, scope,
            image_ids=image_ids, supersample=state.config.supersample)
    except AnnoforgeError as exc:
        raise click.ClickException(f"{exc.code}: {exc}")
    finally:
        state.shutdown()
    docs = [r.to_json() for r in rows]
    if fmt == "json":
        click.echo(json.dumps(docs, indent=2, sort_keys=True))
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(docs[0].keys()) if docs else
                                ["model_id", "label_id", "mean_iou"])
        writer.writeheader()
        writer.writerows(docs)
        click.echo(buf.getvalue(), nl=False)


@main.command("seed-demo")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--folders", type=int, default=2)
@click.option("--images-per-folder", type=int, default=6)
def seed_demo_cmd(out_dir, folders, images_per_folder):
    """Create a demo data root with images, hierarchy, and references."""
    root = seed_demo_root(out_dir, folders=folders,
                          images_per_folder=images_per_folder)
    click.echo(f"demo data root created at {root}")


if __name__ == "__main__":
    sys.exit(main())
