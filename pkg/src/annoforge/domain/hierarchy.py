"""Label hierarchy: a single tree whose leaves are the label classes.

On-disk format (hierarchy.json): one nested root node,
{"node_id": ..., "name": ..., "children": [...]}.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from ..errors import DataRootCorrupt, UnknownLabel, UnknownNode
from .records import HierarchyNode, LabelClass


class Hierarchy:
    def __init__(self, root_id: str, nodes: dict[str, HierarchyNode],
                 labels: dict[str, LabelClass], raw: dict[str, Any]):
        self.root_id = root_id
        self.nodes = nodes
        self.labels = labels
        self.raw = raw  # the original nested document, served to the UI

    @classmethod
    def load(cls, path: Path) -> "Hierarchy":
        if not path.exists():
            # empty data roots serve fine; the bare root doubles as the only
            # label until a real hierarchy.json is provided
            return cls.from_document(
                {"node_id": "root", "name": "Labels", "children": []},
                source=str(path))
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataRootCorrupt(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_document(doc, source=str(path))

    @classmethod
    def from_document(cls, doc: dict[str, Any], source: str = "hierarchy") -> "Hierarchy":
        nodes: dict[str, HierarchyNode] = {}
        labels: dict[str, LabelClass] = {}

        def walk(node_doc: dict[str, Any], parent: Optional[str],
                 path: tuple[str, ...]) -> None:
            try:
                node_id = node_doc["node_id"]
                name = node_doc["name"]
                children = node_doc.get("children", [])
            except (KeyError, TypeError) as exc:
                raise DataRootCorrupt(f"{source}: malformed node ({exc})") from exc
            if node_id in nodes:
                raise DataRootCorrupt(f"{source}: duplicate node id {node_id!r}")
            if node_id in path:
                raise DataRootCorrupt(f"{source}: cycle at node {node_id!r}")
            full_path = path + (node_id,)
            child_ids = tuple(c["node_id"] for c in children)
            nodes[node_id] = HierarchyNode(node_id=node_id, name=name,
                                           parent=parent, children=child_ids)
            if not children:
                labels[node_id] = LabelClass(label_id=node_id, name=name,
                                             hierarchy_path=full_path)
            for child in children:
                walk(child, node_id, full_path)

        if not isinstance(doc, dict):
            raise DataRootCorrupt(f"{source}: root must be a single node object")
        walk(doc, None, ())
        return cls(root_id=doc["node_id"], nodes=nodes, labels=labels, raw=doc)

    def children(self, node_id: Optional[str] = None) -> list[HierarchyNode]:
        if node_id is None:
            node_id = self.root_id
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(f"no hierarchy node {node_id!r}")
        return [self.nodes[c] for c in node.children]

    def require_label(self, label_id: str) -> LabelClass:
        label = self.labels.get(label_id)
        if label is None:
            raise UnknownLabel(f"no label {label_id!r}")
        return label

    def label_names(self) -> dict[str, str]:
        return {lid: lbl.name for lid, lbl in sorted(self.labels.items())}
