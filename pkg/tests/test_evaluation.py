"""Evaluation: greedy matching vs brute force, class means, timelines."""

from __future__ import annotations

import itertools
import math
import random

import pytest

from annoforge.active_learning import ModelPrediction
from annoforge.errors import MixedImages, NoData, NoPredictions
from annoforge.evaluation import (
    ClassReport,
    class_timeline,
    detect_plateau,
    match_predictions,
    model_timeline,
    per_class_report,
)
from annoforge.gateway import MetricsRecord
from annoforge.geometry import GridSpec, iou
from annoforge.pipeline import DatasetSelection

from conftest import accept_annotation, square

GRID = GridSpec(128, 96, 3)


def gt(state, image_id, polygon, label="ground_vehicles"):
    return accept_annotation(state, image_id, polygon, label)


def mp(image_id, polygon, label="ground_vehicles", model="m1", instance=1,
       confidence=0.5, pid=None):
    return ModelPrediction.create(
        image_id=image_id, model_id=model, label_id=label, geometry=polygon,
        confidence=confidence, training_instance=instance, produced_at=0.0,
        prediction_id=pid)


def brute_force_best(gts, preds, grid):
    """Max total IoU over all one-to-one assignments (pairs need IoU > 0)."""
    matrix = {}
    for g in gts:
        for p in preds:
            if g.label_id == p.label_id:
                v = iou(g.polygon, p.geometry, grid)
                if v > 0:
                    matrix[(g.annotation_id, p.prediction_id)] = v
    best = 0.0
    gt_ids = [g.annotation_id for g in gts]
    pred_ids = [p.prediction_id for p in preds]
    for k in range(0, min(len(gt_ids), len(pred_ids)) + 1):
        for chosen_gt in itertools.permutations(gt_ids, k):
            for chosen_pred in itertools.combinations(pred_ids, k):
                total = 0.0
                valid = True
                for g_id, p_id in zip(chosen_gt, chosen_pred):
                    if (g_id, p_id) not in matrix:
                        valid = False
                        break
                    total += matrix[(g_id, p_id)]
                if valid:
                    best = max(best, total)
    return best


# --- matching ----------------------------------------------------------------------

def test_match_identical_polygon(state):
    image = state.store.images_in_folder("folder00")[0]
    polygon = square(20, 20, 40)
    ann = gt(state, image.image_id, polygon)
    result = match_predictions([ann], [mp(image.image_id, polygon)], GRID)
    assert len(result.pairs) == 1
    assert result.pairs[0][2] == 1.0
    assert not result.unmatched_ground_truth
    assert not result.unmatched_predictions


def test_match_label_gated(state):
    image = state.store.images_in_folder("folder00")[0]
    polygon = square(20, 20, 40)
    ann = gt(state, image.image_id, polygon, label="ground_vehicles")
    result = match_predictions([ann], [mp(image.image_id, polygon,
                                          label="rotorcrafts")], GRID)
    assert not result.pairs
    assert result.unmatched_ground_truth == (ann.annotation_id,)
    assert len(result.unmatched_predictions) == 1


def test_match_prefers_higher_iou(state):
    image = state.store.images_in_folder("folder00")[0]
    near = gt(state, image.image_id, square(20, 20, 40))
    far = gt(state, image.image_id, square(24, 20, 40))
    pred = mp(image.image_id, square(21, 20, 40), pid="p1")
    result = match_predictions([near, far], [pred], GRID)
    assert len(result.pairs) == 1
    matched_gt = result.pairs[0][0]
    assert matched_gt == near.annotation_id  # higher-IoU pair wins
    assert result.unmatched_ground_truth == (far.annotation_id,)


def test_match_mixed_images_rejected(state):
    images = state.store.images_in_folder("folder00")
    a = gt(state, images[0].image_id, square(20, 20, 40))
    with pytest.raises(MixedImages):
        match_predictions([a], [mp(images[1].image_id, square(20, 20, 40))], GRID)


def test_match_zero_iou_never_pairs(state):
    image = state.store.images_in_folder("folder00")[0]
    ann = gt(state, image.image_id, square(5, 5, 20))
    result = match_predictions([ann], [mp(image.image_id, square(80, 60, 20))], GRID)
    assert not result.pairs


def test_greedy_equals_bruteforce_on_separated_fixtures(state):
    """Well-separated objects: greedy must equal optimal assignment on every
    <=3x3 fixture we construct."""
    rng = random.Random(31337)
    images = state.store.images_in_folder("folder00")
    cells = [(4, 4), (48, 4), (92, 4), (4, 52), (48, 52), (92, 52)]
    for trial in range(12):
        image = images[trial % len(images)]
        n_gt = rng.randint(1, 3)
        n_pred = rng.randint(1, 3)
        rng.shuffle(cells)
        gts, preds = [], []
        for k in range(n_gt):
            x, y = cells[k]
            polygon = square(x, y, 26)
            gts.append(gt(state, image.image_id, polygon))
            if k < n_pred:
                jitter = rng.uniform(-5, 5)
                preds.append(mp(image.image_id,
                                square(x + jitter, y + rng.uniform(-4, 4), 26),
                                pid=f"p{trial}-{k}"))
        for k in range(n_gt, n_pred):
            x, y = cells[k]
            preds.append(mp(image.image_id, square(x, y, 26), pid=f"p{trial}-{k}"))
        result = match_predictions(gts, preds, GRID)
        greedy_total = math.fsum(v for _, _, v in result.pairs)
        assert greedy_total == pytest.approx(
            brute_force_best(gts, preds, GRID), abs=1e-12)


# --- per-class report ---------------------------------------------------------------

def make_matched_ious(state, values, label="ground_vehicles", model="m1"):
    """One gt+pred per image engineered to produce the given IoU list."""
    images = state.store.images_in_folder("folder00")
    preds = []
    for i, value in enumerate(values):
        image = images[i]
        side = 40.0
        polygon = square(10, 10, side)
        gt(state, image.image_id, polygon, label=label)
        # overlap fraction f of a side-by-side shift: iou = f / (2 - f)
        # => shift = side * (1 - f) with f = 2v/(1+v)
        f = 2 * value / (1 + value)
        shift = side * (1 - f)
        preds.append(mp(image.image_id, square(10 + shift, 10, side),
                        label=label, model=model, pid=f"p{i}"))
    return preds


def test_per_class_mean_from_engineered_ious(state):
    # four pairs whose IoUs are {0.8, 0.7, 0.7, 0.76}; mean must be 0.74
    preds = make_matched_ious(state, [0.8, 0.7, 0.7, 0.76])
    scope = DatasetSelection.create(["folder00"])
    (report,) = per_class_report(state.store, preds, "m1", 1, scope)
    assert report.matched == 4
    assert report.missed_ground_truth == 0
    assert report.mean_iou == pytest.approx(0.74, abs=0.02)


def test_per_class_mean_missed_counts_zero(state):
    images = state.store.images_in_folder("folder00")
    polygon = square(10, 10, 40)
    gt(state, images[0].image_id, polygon)
    gt(state, images[1].image_id, polygon)  # never predicted -> missed
    preds = [mp(images[0].image_id, polygon, pid="p0")]
    scope = DatasetSelection.create(["folder00"])
    (report,) = per_class_report(state.store, preds, "m1", 1, scope)
    assert report.matched == 1 and report.missed_ground_truth == 1
    assert report.mean_iou == pytest.approx((1.0 + 0.0) / 2)


def test_per_class_all_missed_is_zero(state):
    images = state.store.images_in_folder("folder00")
    gt(state, images[0].image_id, square(10, 10, 40))
    preds = [mp(images[0].image_id, square(10, 10, 40), label="rotorcrafts",
                pid="p0")]
    scope = DatasetSelection.create(["folder00"])
    reports = {r.label_id: r for r in
               per_class_report(state.store, preds, "m1", 1, scope)}
    assert reports["ground_vehicles"].mean_iou == 0.0
    assert reports["ground_vehicles"].missed_ground_truth == 1
    assert reports["rotorcrafts"].spurious_predictions == 1


def test_spurious_prediction_never_changes_mean(state):
    preds = make_matched_ious(state, [0.8, 0.7])
    scope = DatasetSelection.create(["folder00"])
    (before,) = per_class_report(state.store, preds, "m1", 1, scope)
    # an extra prediction overlapping nothing
    spurious = mp(state.store.images_in_folder("folder00")[5].image_id,
                  square(100, 70, 20), pid="px")
    (after,) = per_class_report(state.store, preds + [spurious], "m1", 1, scope)
    assert after.mean_iou == before.mean_iou
    assert after.spurious_predictions == before.spurious_predictions + 1


def test_report_mean_permutation_invariant(state):
    preds = make_matched_ious(state, [0.8, 0.7, 0.7, 0.76])
    scope = DatasetSelection.create(["folder00"])
    (fwd,) = per_class_report(state.store, preds, "m1", 1, scope)
    (rev,) = per_class_report(state.store, list(reversed(preds)), "m1", 1, scope)
    assert fwd.mean_iou == rev.mean_iou


def test_report_requires_predictions(state):
    scope = DatasetSelection.create(["folder00"])
    with pytest.raises(NoPredictions):
        per_class_report(state.store, [], "m1", 1, scope)


# --- timelines -------------------------------------------------------------------------

def record(model, instance, mean, label="ALL", count=1, at=0.0):
    return MetricsRecord(job_id="j", model_id=model, label_id=label,
                         training_instance=instance, mean_iou=mean,
                         sample_count=count, recorded_at=at)


def test_model_timeline_sorted_points():
    records = [record("m", 2, 0.6), record("m", 1, 0.5)]
    timeline = model_timeline(records, "m")
    assert timeline["series"] == [(1, 0.5), (2, 0.6)]
    assert timeline["plateaued"] is False


def test_model_timeline_single_point():
    timeline = model_timeline([record("m", 1, 0.4)], "m")
    assert timeline["series"] == [(1, 0.4)]


def test_model_timeline_weighted_aggregate():
    records = [record("m", 1, 0.8, label="a", count=3),
               record("m", 1, 0.4, label="b", count=1)]
    timeline = model_timeline(records, "m")
    assert timeline["series"] == [(1, pytest.approx(0.7))]


def test_model_timeline_no_data():
    with pytest.raises(NoData):
        model_timeline([], "m")


def test_class_timeline():
    records = [record("m", i, 0.2 * i, label="rotorcrafts") for i in (1, 2, 3)]
    timeline = class_timeline(records, "m", "rotorcrafts")
    assert [i for i, _ in timeline["series"]] == [1, 2, 3]
    with pytest.raises(NoData):
        class_timeline(records, "m", "ground_vehicles")


def test_plateau_detection():
    assert detect_plateau([0.5, 0.705, 0.71, 0.712])
    assert not detect_plateau([0.5, 0.6, 0.7, 0.8])
    assert not detect_plateau([0.5, 0.5])  # needs 3 points
    # rising then flat tail
    flat_series = [0.2, 0.5, 0.700, 0.704, 0.706]
    assert detect_plateau(flat_series)
