"""Generate a small self-contained data root for demos and tests."""

from __future__ import annotations

import json
from pathlib import Path

from .imagefiles import write_png

DEMO_HIERARCHY = {
    "node_id": "root",
    "name": "Objects",
    "children": [
        {
            "node_id": "vehicles",
            "name": "Vehicles",
            "children": [
                {"node_id": "airborne_vehicles", "name": "Airborne vehicles",
                 "children": []},
                {"node_id": "ground_vehicles", "name": "Ground vehicles",
                 "children": []},
                {"node_id": "rotorcrafts", "name": "Rotorcrafts", "children": []},
            ],
        },
        {
            "node_id": "infrastructure",
            "name": "Infrastructure",
            "children": [
                {"node_id": "buildings", "name": "Buildings", "children": []},
            ],
        },
    ],
}


def seed_demo_root(root: Path | str, folders: int = 2, images_per_folder: int = 6,
                   width: int = 128, height: int = 96) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    (root / "hierarchy.json").write_text(
        json.dumps(DEMO_HIERARCHY, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for f in range(folders):
        folder = root / "folders" / f"folder{f:02d}" / "images"
        for i in range(images_per_folder):
            shade = 40 + 20 * ((f * images_per_folder + i) % 8)
            write_png(folder / f"img{i:03d}.png", width, height,
                      rgb=(shade, shade, shade + 10))
    for label, shade in (("ground_vehicles", 80), ("rotorcrafts", 140)):
        ref_dir = root / "references" / label
        write_png(ref_dir / "example1.png", 64, 48, rgb=(shade, 60, 60))
        write_png(ref_dir / "example2.png", 64, 48, rgb=(60, shade, 60))
        (ref_dir / "captions.json").write_text(
            json.dumps({"example1.png": f"typical {label.replace('_', ' ')}"},
                       sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return root
