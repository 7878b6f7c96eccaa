"""Mock worker: zero-noise exactness, determinism, cross-module agreement."""

from __future__ import annotations

import pytest

from annoforge import mock_worker
from annoforge.errors import IllegalState
from annoforge.evaluation import model_timeline, per_class_report
from annoforge.pipeline import DatasetSelection

from conftest import LABELS, accept_annotation, square


@pytest.fixture
def trained(state):
    """12 annotated images across 3 classes in two folders, plus a model."""
    cells = [(4, 4), (68, 4), (4, 52)]
    count = 0
    for folder in ("folder00", "folder01"):
        for image in state.store.images_in_folder(folder):
            label = LABELS[count % 3]
            x, y = cells[count % 3]
            accept_annotation(state, image.image_id, square(x, y, 36), label)
            count += 1
    entry = state.gateway.register_model("mock_target", "canonical",
                                         {"learning_rate": 0.01, "epochs": 1})
    selection = DatasetSelection.create(["folder00", "folder01"])
    return state, entry, selection


def test_zero_noise_gives_perfect_iou(trained):
    state, entry, selection = trained
    state.gateway.create_training_job(entry.model_id, selection, 0.8, seed=21)
    summary = mock_worker.run(state.gateway, noise_scale=0.0, seed=1)
    assert summary["predictions_posted"] == 3  # floor(0.8*12)=9 train, 3 eval
    for metric in summary["metrics"]:
        assert metric["mean_iou"] == 1.0
    timeline = model_timeline(state.gateway.metrics_records, entry.model_id)
    assert timeline["series"][-1][1] == 1.0


def test_zero_noise_predictions_dropped_as_redundant(trained):
    state, entry, selection = trained
    state.gateway.create_training_job(entry.model_id, selection, 0.8, seed=21)
    summary = mock_worker.run(state.gateway, noise_scale=0.0, seed=1)
    # identical to accepted ground truth -> redundant for the corpus,
    # but still logged for evaluation
    assert all(r.get("action") == "dropped" for r in summary["results"])
    assert len(state.scheduler.predictions_for(entry.model_id)) == 3


def test_same_seed_same_output(trained):
    state, entry, selection = trained
    state.gateway.create_training_job(entry.model_id, selection, 0.8, seed=21)
    s1 = mock_worker.run(state.gateway, noise_scale=6.0, seed=9)
    state.gateway.create_training_job(entry.model_id, selection, 0.8, seed=21)
    s2 = mock_worker.run(state.gateway, noise_scale=6.0, seed=9)
    assert s1["metrics"] == s2["metrics"]
    p1 = state.scheduler.predictions_for(entry.model_id, training_instance=1)
    p2 = state.scheduler.predictions_for(entry.model_id, training_instance=2)
    assert [p.geometry.vertices for p in p1] == [p.geometry.vertices for p in p2]
    assert [p.confidence for p in p1] == [p.confidence for p in p2]


def test_noisy_metrics_match_evaluation_recompute(trained):
    state, entry, selection = trained
    job = state.gateway.create_training_job(entry.model_id, selection, 0.8, seed=21)
    summary = mock_worker.run(state.gateway, noise_scale=10.0, seed=4)
    posted = {m["label_id"]: m["mean_iou"] for m in summary["metrics"]}
    assert any(v < 1.0 for v in posted.values())

    preds = state.scheduler.predictions_for(entry.model_id, training_instance=1)
    reports = per_class_report(state.store, preds, entry.model_id, 1, selection,
                               image_ids=set(job.split.eval))
    recomputed = {r.label_id: r.mean_iou for r in reports}
    assert set(recomputed) == set(posted)
    for label, value in posted.items():
        assert abs(recomputed[label] - value) <= 1e-9


def test_mock_worker_requires_pending_job(state):
    with pytest.raises(IllegalState):
        mock_worker.run(state.gateway, noise_scale=0.0, seed=1)


def test_confidence_tracks_noise(trained):
    state, entry, selection = trained
    state.gateway.create_training_job(entry.model_id, selection, 0.8, seed=21)
    mock_worker.run(state.gateway, noise_scale=10.0, seed=4)
    for pred in state.scheduler.predictions_for(entry.model_id):
        assert 0.45 <= pred.confidence <= 0.55  # 1 - 10/20 = 0.5, jitter 0.05
