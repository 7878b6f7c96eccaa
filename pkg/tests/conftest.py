"""Shared fixtures: data roots, booted app states, and annotated stores."""

from __future__ import annotations

import pytest

from annoforge.clock import ManualClock
from annoforge.demo import seed_demo_root
from annoforge.domain import Author
from annoforge.geometry import Polygon
from annoforge.server import AppState, ServerConfig

LABELS = ("airborne_vehicles", "ground_vehicles", "rotorcrafts")


@pytest.fixture
def clock():
    return ManualClock(1_000_000.0)


@pytest.fixture
def data_root(tmp_path):
    return seed_demo_root(tmp_path / "root", folders=2, images_per_folder=6)


@pytest.fixture
def state(data_root, clock):
    app_state = AppState.boot(ServerConfig(data_root=data_root).validate(), clock=clock)
    yield app_state
    app_state.shutdown()


def square(x0: float, y0: float, side: float) -> Polygon:
    return Polygon.from_points(
        [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)])


def accept_annotation(state: AppState, image_id: str, polygon: Polygon,
                      label_id: str, user: str = "alice", reviewer: str = "bob"):
    ann = state.store.create_annotation(image_id, polygon, label_id,
                                        Author.human(user))
    return state.store.qc_accept(ann.annotation_id, reviewer)


def annotate_folder(state: AppState, folder_id: str, label_id: str = "ground_vehicles",
                    polygon: Polygon | None = None):
    """Give every image in the folder one accepted annotation."""
    polygon = polygon or square(20, 20, 40)
    out = []
    for image in state.store.images_in_folder(folder_id):
        out.append(accept_annotation(state, image.image_id, polygon, label_id))
    return out


def pytest_runtest_logreport(report):
    """One pass/fail line per acceptance criterion (tests named test_cNN_*)."""
    import re
    import sys

    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    match = re.search(r"test_c(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    status = "PASS" if report.passed else "FAIL"
    name = match.group(2).replace("_", " ")
    sys.stderr.write(f"[criterion {int(match.group(1))}] {status}: {name}\n")
