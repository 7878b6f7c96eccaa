"""Export bundles (canonical / COCO / VOC) and canonical import.

Exports are pure snapshots with stable ordering everywhere, so two exports
of the same store are byte-identical. VOC carries bounding boxes only (the
format has no polygon segmentation); that loss is one-way by design.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path
from xml.sax.saxutils import escape

from ..domain import Annotation, AnnotationStatus, AnnotationStore, Author
from ..errors import SchemaViolation, UnsupportedFormat
from ..geometry import Polygon
from .split import DatasetSelection, SplitResult, resolve_selection

FORMATS = ("canonical", "coco", "voc")


def _dump_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def export(store: AnnotationStore, selection: DatasetSelection, split: SplitResult,
           fmt: str, out_dir: Path | str, copy_images: bool = False) -> dict:
    """Write train/ and eval/ subsets plus a manifest; returns the manifest."""
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"format must be one of {FORMATS}, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    resolved = resolve_selection(store, selection)

    subsets = {"train": sorted(i for i in split.train if i in resolved),
               "eval": sorted(i for i in split.eval if i in resolved)}

    label_map = store.hierarchy.label_names()
    counts = {}
    for subset, image_ids in subsets.items():
        counts[f"{subset}_images"] = len(image_ids)
        counts[f"{subset}_annotations"] = sum(len(resolved[i]) for i in image_ids)

    manifest = {
        "format": fmt,
        "seed": split.seed,
        "ratio": split.ratio,
        "counts": counts,
        "label_map": label_map,
        "selection": selection.to_json(),
    }
    _dump_json(out / "manifest.json", manifest)

    if fmt == "canonical":
        for subset, image_ids in subsets.items():
            _dump_json(out / subset / "annotations.json",
                       _canonical_subset(store, resolved, subset, image_ids))
    elif fmt == "coco":
        cat_ids = {lid: i + 1 for i, lid in enumerate(sorted(label_map))}
        img_ids = {iid: i + 1 for i, iid in
                   enumerate(sorted(subsets["train"]) + sorted(subsets["eval"]))}
        for subset, image_ids in subsets.items():
            _dump_json(out / f"instances_{subset}.json",
                       _coco_subset(store, resolved, image_ids, img_ids, cat_ids))
    elif fmt == "voc":
        for subset, image_ids in subsets.items():
            for image_id in image_ids:
                xml = _voc_document(store, resolved, image_id)
                path = out / subset / f"{image_id}.xml"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(xml, encoding="utf-8")

    if copy_images:
        for image_ids in subsets.values():
            for image_id in image_ids:
                rel = store.images[image_id].file_path
                dst = out / "images" / rel
                dst.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(store.data_root / rel, dst)
    return manifest


def _canonical_subset(store, resolved, subset: str, image_ids: list[str]) -> dict:
    images = []
    for image_id in image_ids:
        image = store.images[image_id]
        images.append({
            "image_id": image_id,
            "file_path": image.file_path,
            "width": image.width,
            "height": image.height,
            "annotations": [
                {
                    "annotation_id": a.annotation_id,
                    "label_id": a.label_id,
                    "label_name": store.hierarchy.labels[a.label_id].name,
                    "polygon": a.polygon.to_json(),
                    "author": a.author.to_json(),
                    "confidence": a.confidence,
                    "status": a.status.value,
                }
                for a in sorted(resolved[image_id], key=lambda a: a.annotation_id)
            ],
        })
    return {"subset": subset, "images": images}


def _coco_subset(store, resolved, image_ids, img_ids, cat_ids) -> dict:
    images = []
    annotations = []
    ann_counter = 0
    for image_id in image_ids:
        image = store.images[image_id]
        images.append({
            "id": img_ids[image_id],
            "file_name": image.file_path,
            "width": image.width,
            "height": image.height,
        })
        for ann in sorted(resolved[image_id], key=lambda a: a.annotation_id):
            ann_counter += 1
            seg = [c for xy in ann.polygon.vertices for c in xy]
            x0, y0, x1, y1 = ann.polygon.bbox()
            annotations.append({
                "id": ann_counter,
                "image_id": img_ids[image_id],
                "category_id": cat_ids[ann.label_id],
                "segmentation": [seg],
                "bbox": [x0, y0, x1 - x0, y1 - y0],
                "area": ann.polygon.area,
                "iscrowd": 0,
            })
    categories = []
    for label_id in sorted(cat_ids):
        label = store.hierarchy.labels[label_id]
        parent = label.hierarchy_path[-2] if len(label.hierarchy_path) > 1 else None
        categories.append({
            "id": cat_ids[label_id],
            "name": label.name,
            "supercategory": store.hierarchy.nodes[parent].name if parent else "",
        })
    return {"images": images, "annotations": annotations, "categories": categories}


def _voc_document(store, resolved, image_id: str) -> str:
    image = store.images[image_id]
    lines = [
        "<annotation>",
        f"  <folder>{escape(image.folder_id)}</folder>",
        f"  <filename>{escape(Path(image.file_path).name)}</filename>",
        "  <size>",
        f"    <width>{image.width}</width>",
        f"    <height>{image.height}</height>",
        "    <depth>3</depth>",
        "  </size>",
    ]
    for ann in sorted(resolved[image_id], key=lambda a: a.annotation_id):
        x0, y0, x1, y1 = ann.polygon.bbox()
        name = store.hierarchy.labels[ann.label_id].name
        lines += [
            "  <object>",
            f"    <name>{escape(name)}</name>",
            "    <bndbox>",
            f"      <xmin>{x0:g}</xmin>",
            f"      <ymin>{y0:g}</ymin>",
            f"      <xmax>{x1:g}</xmax>",
            f"      <ymax>{y1:g}</ymax>",
            "    </bndbox>",
            "  </object>",
        ]
    lines.append("</annotation>")
    return "\n".join(lines) + "\n"


def import_canonical(store: AnnotationStore, bundle_dir: Path | str) -> int:
    """Load a canonical bundle into the store; annotations arrive Accepted.

    Returns the number of annotations imported. Raises SchemaViolation with
    file and field diagnostics on any malformed input.
    """
    bundle = Path(bundle_dir)
    manifest_path = bundle / "manifest.json"
    if not manifest_path.exists():
        raise SchemaViolation(f"{manifest_path}: missing manifest")
    manifest = _load_json(manifest_path)
    if manifest.get("format") != "canonical":
        raise SchemaViolation(
            f"{manifest_path}: field 'format' must be 'canonical', "
            f"got {manifest.get('format')!r}")

    imported = 0
    for subset in ("train", "eval"):
        path = bundle / subset / "annotations.json"
        if not path.exists():
            raise SchemaViolation(f"{path}: missing subset file")
        doc = _load_json(path)
        images = doc.get("images")
        if not isinstance(images, list):
            raise SchemaViolation(f"{path}: field 'images' must be a list")
        for image_doc in images:
            image_id = image_doc.get("image_id")
            if image_id not in store.images:
                raise SchemaViolation(f"{path}: unknown image {image_id!r}")
            for idx, ann_doc in enumerate(image_doc.get("annotations", [])):
                imported += 1
                _import_annotation(store, path, image_id, idx, ann_doc)
    return imported


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def _import_annotation(store, path: Path, image_id: str, idx: int, doc: dict) -> None:
    where = f"{path}: images[{image_id}].annotations[{idx}]"
    for key in ("annotation_id", "label_id", "polygon"):
        if key not in doc:
            raise SchemaViolation(f"{where}: missing field '{key}'")
    label_id = doc["label_id"]
    if label_id not in store.hierarchy.labels:
        raise SchemaViolation(f"{where}: unknown label {label_id!r}")
    try:
        polygon = Polygon.from_points(doc["polygon"])
    except Exception as exc:
        raise SchemaViolation(f"{where}: invalid polygon ({exc})") from exc
    author_doc = doc.get("author", {"kind": "human", "id": "import"})
    now = store.clock.now()
    ann = Annotation(
        annotation_id=doc["annotation_id"],
        image_id=image_id,
        polygon=polygon,
        label_id=label_id,
        author=Author.from_json(author_doc),
        confidence=float(doc.get("confidence", 1.0)),
        status=AnnotationStatus.ACCEPTED,
        created_at=now,
        updated_at=now,
    )
    store.adopt_annotation(ann)
