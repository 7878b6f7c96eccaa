"""Annotation store: records, QC state machine, hierarchy, persistence."""

from __future__ import annotations

import json
import random

import pytest

from annoforge.domain import (
    Annotation,
    AnnotationState,
    AnnotationStatus,
    AnnotationStore,
    Author,
    Hierarchy,
)
from annoforge.errors import (
    DataRootCorrupt,
    IllegalTransition,
    OutOfBounds,
    UnknownAnnotation,
    UnknownImage,
    UnknownLabel,
    UnknownNode,
    ValidationError,
)
from conftest import square


def first_image(state, folder="folder00"):
    return state.store.images_in_folder(folder)[0]


# --- create_annotation -------------------------------------------------------

def test_create_human_annotation(state):
    image = first_image(state)
    ann = state.store.create_annotation(image.image_id, square(10, 10, 30),
                                        "ground_vehicles", Author.human("alice"))
    assert ann.status == AnnotationStatus.SUBMITTED
    assert ann.confidence == 1.0
    assert ann.revision == 1
    assert state.store.annotation_state(image.image_id) == AnnotationState.ANNOTATED


def test_create_model_annotation_auto_accepted(state):
    image = first_image(state)
    ann = state.store.create_annotation(image.image_id, square(10, 10, 30),
                                        "ground_vehicles", Author.model("m1"),
                                        confidence=0.85)
    assert ann.status == AnnotationStatus.AUTO_ACCEPTED
    assert ann.machine_authored


def test_model_annotation_below_threshold_rejected(state):
    image = first_image(state)
    with pytest.raises(ValidationError):
        state.store.create_annotation(image.image_id, square(10, 10, 30),
                                      "ground_vehicles", Author.model("m1"),
                                      confidence=0.5)


def test_polygon_outside_image_rejected(state):
    image = first_image(state)
    with pytest.raises(OutOfBounds):
        state.store.create_annotation(image.image_id, square(5000, 5000, 10),
                                      "ground_vehicles", Author.human("alice"))


def test_polygon_clipped_to_image_bounds(state):
    image = first_image(state)  # 128x96
    ann = state.store.create_annotation(image.image_id, square(100, 60, 100),
                                        "ground_vehicles", Author.human("alice"))
    for x, y in ann.polygon.vertices:
        assert 0 <= x <= image.width and 0 <= y <= image.height


def test_unknown_image_and_label(state):
    image = first_image(state)
    with pytest.raises(UnknownImage):
        state.store.create_annotation("nope", square(0, 0, 5), "ground_vehicles",
                                      Author.human("a"))
    with pytest.raises(UnknownLabel):
        state.store.create_annotation(image.image_id, square(0, 0, 5), "nope",
                                      Author.human("a"))


# --- QC flow -----------------------------------------------------------------

def make_submitted(state, n=1, folder="folder00"):
    anns = []
    for image in state.store.images_in_folder(folder)[:n]:
        anns.append(state.store.create_annotation(
            image.image_id, square(10, 10, 30), "ground_vehicles",
            Author.human("alice")))
    return anns


def test_qc_list_empty(state):
    assert state.store.qc_list() == []


def test_qc_list_filters_status(state):
    a1, a2, a3 = make_submitted(state, 3)
    state.store.qc_accept(a3.annotation_id, "bob")
    pending = state.store.qc_list()
    assert {a.annotation_id for a in pending} == {a1.annotation_id, a2.annotation_id}


def test_qc_list_machine_filter(state):
    make_submitted(state, 1)
    image = state.store.images_in_folder("folder00")[1]
    model_ann = state.store.create_annotation(
        image.image_id, square(10, 10, 30), "rotorcrafts", Author.model("m1"),
        confidence=0.9)
    only_model = state.store.qc_list(author_kind="model")
    assert [a.annotation_id for a in only_model] == [model_ann.annotation_id]
    assert only_model[0].machine_authored


def test_qc_list_ordered_by_creation(state, clock):
    anns = []
    for image in state.store.images_in_folder("folder00")[:3]:
        anns.append(state.store.create_annotation(
            image.image_id, square(10, 10, 30), "ground_vehicles",
            Author.human("alice")))
        clock.advance(10)
    listed = state.store.qc_list()
    assert [a.annotation_id for a in listed] == [a.annotation_id for a in anns]


def test_qc_accept_transitions(state):
    (ann,) = make_submitted(state)
    accepted = state.store.qc_accept(ann.annotation_id, "bob")
    assert accepted.status == AnnotationStatus.ACCEPTED
    with pytest.raises(IllegalTransition):
        state.store.qc_accept(ann.annotation_id, "bob")


def test_qc_reject_terminal(state):
    (ann,) = make_submitted(state)
    rejected = state.store.qc_reject(ann.annotation_id, "bob", "wrong label")
    assert rejected.status == AnnotationStatus.REJECTED
    assert rejected.reject_reason == "wrong label"
    with pytest.raises(IllegalTransition):
        state.store.qc_accept(ann.annotation_id, "bob")
    with pytest.raises(IllegalTransition):
        state.store.qc_reject(ann.annotation_id, "bob", "again")


def test_qc_accept_auto_accepted(state):
    image = first_image(state)
    ann = state.store.create_annotation(image.image_id, square(10, 10, 30),
                                        "rotorcrafts", Author.model("m1"),
                                        confidence=0.9)
    assert state.store.qc_accept(ann.annotation_id, "bob").status == AnnotationStatus.ACCEPTED


def test_qc_reject_returns_image_to_pool(state):
    image = first_image(state)
    ann = state.store.create_annotation(image.image_id, square(10, 10, 30),
                                        "ground_vehicles", Author.human("alice"))
    assert state.store.annotation_state(image.image_id) == AnnotationState.ANNOTATED
    state.store.qc_reject(ann.annotation_id, "bob", "bad")
    assert state.store.annotation_state(image.image_id) == AnnotationState.UNANNOTATED


def test_unknown_annotation(state):
    with pytest.raises(UnknownAnnotation):
        state.store.qc_accept("missing", "bob")


def test_qc_edit_label_only(state):
    (ann,) = make_submitted(state)
    state.store.qc_accept(ann.annotation_id, "bob")
    edited = state.store.qc_edit(ann.annotation_id, "carol", new_label="rotorcrafts")
    assert edited.label_id == "rotorcrafts"
    assert edited.revision == 2
    assert edited.status == AnnotationStatus.SUBMITTED
    assert edited.author.kind == "human"  # author preserved


def test_qc_edit_polygon_keeps_history(state):
    (ann,) = make_submitted(state)
    old_polygon = ann.polygon.to_json()
    edited = state.store.qc_edit(ann.annotation_id, "carol",
                                 new_polygon=square(40, 40, 20))
    assert edited.history[-1]["polygon"] == old_polygon
    assert edited.history[-1]["revision"] == 1
    assert edited.polygon.to_json() != old_polygon


def test_qc_edit_requires_a_field(state):
    (ann,) = make_submitted(state)
    with pytest.raises(ValidationError):
        state.store.qc_edit(ann.annotation_id, "carol")


def test_qc_edit_rejected_forbidden(state):
    (ann,) = make_submitted(state)
    state.store.qc_reject(ann.annotation_id, "bob", "no")
    with pytest.raises(IllegalTransition):
        state.store.qc_edit(ann.annotation_id, "carol", new_label="rotorcrafts")


def test_qc_state_machine_random_ops(state):
    """No op sequence produces a transition outside the declared set."""
    rng = random.Random(1234)
    legal = {
        AnnotationStatus.SUBMITTED: {AnnotationStatus.ACCEPTED,
                                     AnnotationStatus.REJECTED,
                                     AnnotationStatus.SUBMITTED},
        AnnotationStatus.AUTO_ACCEPTED: {AnnotationStatus.ACCEPTED,
                                         AnnotationStatus.REJECTED,
                                         AnnotationStatus.SUBMITTED},
        AnnotationStatus.ACCEPTED: {AnnotationStatus.SUBMITTED},
        AnnotationStatus.REJECTED: set(),
    }
    anns = make_submitted(state, 4)
    image = state.store.images_in_folder("folder01")[0]
    anns.append(state.store.create_annotation(
        image.image_id, square(10, 10, 30), "rotorcrafts", Author.model("m1"),
        confidence=0.95))
    for _ in range(300):
        ann = rng.choice(anns)
        before = ann.status
        op = rng.choice(["accept", "reject", "edit"])
        try:
            if op == "accept":
                state.store.qc_accept(ann.annotation_id, "bob")
            elif op == "reject":
                state.store.qc_reject(ann.annotation_id, "bob", "r")
            else:
                state.store.qc_edit(ann.annotation_id, "bob", new_label="buildings")
        except IllegalTransition:
            assert ann.status == before
            continue
        assert ann.status in legal[before]
        # revision strictly increases on edits, never decreases otherwise
        assert ann.revision >= 1


# --- hierarchy / references ------------------------------------------------------

def test_hierarchy_children_root(state):
    roots = state.store.hierarchy_children()
    assert [n.node_id for n in roots] == ["vehicles", "infrastructure"]


def test_hierarchy_children_of_node(state):
    kids = state.store.hierarchy_children("vehicles")
    assert [n.node_id for n in kids] == ["airborne_vehicles", "ground_vehicles",
                                         "rotorcrafts"]
    assert state.store.hierarchy_children("buildings") == []


def test_hierarchy_unknown_node(state):
    with pytest.raises(UnknownNode):
        state.store.hierarchy_children("nope")


def test_hierarchy_rejects_cycle():
    doc = {"node_id": "a", "name": "A",
           "children": [{"node_id": "a", "name": "A again", "children": []}]}
    with pytest.raises(DataRootCorrupt):
        Hierarchy.from_document(doc)


def test_hierarchy_label_paths(state):
    label = state.store.hierarchy.labels["ground_vehicles"]
    assert label.hierarchy_path == ("root", "vehicles", "ground_vehicles")


def test_reference_images(state):
    refs = state.store.reference_images_for("ground_vehicles")
    assert len(refs) == 2
    assert refs[0].caption == "typical ground vehicles"
    assert state.store.reference_images_for("buildings") == []
    with pytest.raises(UnknownLabel):
        state.store.reference_images_for("nope")


# --- persistence ---------------------------------------------------------------------

def test_annotations_survive_reload(state, data_root, clock):
    (ann,) = make_submitted(state)
    state.store.qc_accept(ann.annotation_id, "bob")
    reloaded = AnnotationStore(data_root, clock=clock)
    again = reloaded.annotations[ann.annotation_id]
    assert again.status == AnnotationStatus.ACCEPTED
    assert again.polygon.vertices == ann.polygon.vertices
    assert again.author == ann.author


def test_annotation_document_layout(state, data_root):
    (ann,) = make_submitted(state)
    path = (data_root / "folders" / "folder00" / "annotations"
            / f"{ann.image_id}.ann.json")
    doc = json.loads(path.read_text())
    assert doc["image_id"] == ann.image_id
    assert doc["annotations"][0]["polygon"] == ann.polygon.to_json()
    # stable key ordering for diffability
    assert list(doc) == sorted(doc)


def test_model_annotations_respect_threshold_invariant(state):
    threshold = state.store.auto_accept_threshold
    image = first_image(state)
    state.store.create_annotation(image.image_id, square(10, 10, 30),
                                  "rotorcrafts", Author.model("m1"), confidence=0.92)
    for ann in state.store.annotations.values():
        if ann.machine_authored:
            assert ann.confidence >= threshold
