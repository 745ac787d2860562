"""Fixed concept hierarchy for browsing researchers by discipline.

Researchers are classified into leaf classes from their per-leaf hybrid
scores and the emitted JSON mirrors the tree with ranked researcher lists
under each retained leaf.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from math import inf
from pathlib import Path
from typing import Mapping

import numpy as np

MAX_DEPTH = 6
DEFAULT_MAX_LEAVES = 7
THRESHOLD_PERCENTILE = 75.0


class TreeError(ValueError):
    """Concept tree file is malformed or violates tree structure."""


@dataclass(frozen=True)
class TreeNode:
    label: str
    children: tuple[str, ...]


class ConceptTree:
    def __init__(self, nodes: dict[str, TreeNode], root: str):
        _validate_tree(nodes, root)
        self.nodes = nodes
        self.root = root

    def leaves(self) -> list[str]:
        """Leaf node ids in depth-first preorder."""
        found = []
        stack = [self.root]
        while stack:
            node_id = stack.pop()
            node = self.nodes[node_id]
            if node.children:
                stack.extend(reversed(node.children))
            else:
                found.append(node_id)
        return found

    def leaf_label_map(self) -> dict[str, str]:
        return {self.nodes[leaf].label: leaf for leaf in self.leaves()}


def _validate_tree(nodes: dict[str, TreeNode], root: str) -> None:
    if root not in nodes:
        raise TreeError(f"root {root!r} is not a node")
    parents: dict[str, str] = {}
    for node_id, node in nodes.items():
        for child in node.children:
            if child not in nodes:
                raise TreeError(f"node {node_id!r} references missing child {child!r}")
            if child in parents:
                raise TreeError(f"node {child!r} has multiple parents")
            if child == root:
                raise TreeError("root cannot have a parent (cycle)")
            parents[child] = node_id

    # Walk from the root; revisits mean a cycle, leftovers mean extra roots.
    depth = {root: 1}
    stack = [root]
    while stack:
        node_id = stack.pop()
        if depth[node_id] > MAX_DEPTH:
            raise TreeError(f"depth exceeds {MAX_DEPTH} levels at node {node_id!r}")
        for child in nodes[node_id].children:
            if child in depth:
                raise TreeError(f"cycle through node {child!r}")
            depth[child] = depth[node_id] + 1
            stack.append(child)
    unreachable = set(nodes) - set(depth)
    if unreachable:
        raise TreeError(f"nodes unreachable from root: {sorted(unreachable)}")

    labels: set[str] = set()
    for node_id, node in nodes.items():
        if not node.children:
            if node.label in labels:
                raise TreeError(f"duplicate leaf label {node.label!r}")
            labels.add(node.label)


def load_tree(path: str | Path) -> ConceptTree:
    """Parse and validate a concept tree file.

    Format: one JSON object with "root" and "nodes"; each node is
    {"label": str, "children": [node ids]}.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise TreeError(f"unreadable tree file: {exc}") from exc
    return tree_from_payload(payload)


def tree_from_payload(payload: dict) -> ConceptTree:
    if not isinstance(payload, dict) or "root" not in payload or "nodes" not in payload:
        raise TreeError('tree file needs "root" and "nodes" keys')
    nodes = {}
    for node_id, spec in payload["nodes"].items():
        if not isinstance(spec, dict) or "label" not in spec:
            raise TreeError(f"node {node_id!r} needs a label")
        children = spec.get("children", [])
        if not all(isinstance(c, str) for c in children):
            raise TreeError(f"node {node_id!r} has non-string children")
        nodes[node_id] = TreeNode(label=str(spec["label"]), children=tuple(children))
    return ConceptTree(nodes, payload["root"])


def default_tree() -> ConceptTree:
    """Small computer-science tree shipped with the package."""
    ref = resources.files("expertsearch.data").joinpath("concept_tree.json")
    return tree_from_payload(json.loads(ref.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class BrowseCriteria:
    """qualify_threshold None means per-leaf 75th percentile of nonzero scores."""

    qualify_threshold: float | None = None
    max_leaves: int = DEFAULT_MAX_LEAVES

    def __post_init__(self):
        if self.max_leaves < 1:
            raise ValueError("max_leaves must be >= 1")


@dataclass
class LeafAssignment:
    leaves: dict[str, list[tuple[str, float]]] = field(default_factory=dict)
    unplaced: list[str] = field(default_factory=list)


def leaf_thresholds(
    scores: Mapping[str, Mapping[str, float]],
    leaf_labels: Mapping[str, str],
    criteria: BrowseCriteria,
) -> dict[str, float]:
    """Qualifying threshold per leaf label.

    A leaf with no nonzero score gets an infinite threshold; nobody can
    qualify there, though the top-leaf fallback may still place someone.
    """
    if criteria.qualify_threshold is not None:
        return {label: criteria.qualify_threshold for label in leaf_labels}
    thresholds = {}
    for label in leaf_labels:
        values = [r.get(label, 0.0) for r in scores.values() if r.get(label, 0.0) > 0.0]
        thresholds[label] = float(np.percentile(values, THRESHOLD_PERCENTILE)) if values else inf
    return thresholds


def classify(
    tree: ConceptTree,
    scores: Mapping[str, Mapping[str, float]],
    criteria: BrowseCriteria = BrowseCriteria(),
) -> LeafAssignment:
    """Place each researcher into leaf classes.

    Qualified leaves are those with a nonzero score at or above the leaf's
    threshold; a researcher enters their top min(max_leaves, |qualified|)
    qualified leaves, or their single best-scoring leaf when none qualify.
    All-zero researchers are reported unplaced.  Labels in the score maps
    that name no tree leaf are ignored.
    """
    label_to_leaf = tree.leaf_label_map()
    thresholds = leaf_thresholds(scores, label_to_leaf, criteria)
    assignment = LeafAssignment()
    for researcher in sorted(scores):
        nonzero = [
            (label, scores[researcher].get(label, 0.0))
            for label in label_to_leaf
            if scores[researcher].get(label, 0.0) > 0.0
        ]
        if not nonzero:
            assignment.unplaced.append(researcher)
            continue
        qualified = [(label, s) for label, s in nonzero if s >= thresholds[label]]
        if qualified:
            qualified.sort(key=lambda item: (-item[1], item[0]))
            chosen = qualified[: min(criteria.max_leaves, len(qualified))]
        else:
            chosen = [min(nonzero, key=lambda item: (-item[1], item[0]))]
        for label, score in chosen:
            assignment.leaves.setdefault(label_to_leaf[label], []).append((researcher, score))
    for ranked in assignment.leaves.values():
        ranked.sort(key=lambda item: (-item[1], item[0]))
    return assignment


def render_browse(tree: ConceptTree, assignment: LeafAssignment) -> dict:
    """Nested view of the tree: interior skeleton kept, empty leaves dropped."""

    def render(node_id: str) -> dict | None:
        node = tree.nodes[node_id]
        if not node.children:
            ranked = assignment.leaves.get(node_id)
            if not ranked:
                return None
            return {
                "label": node.label,
                "researchers": [{"id": r, "score": s} for r, s in ranked],
            }
        children = [render(c) for c in node.children]
        return {"label": node.label, "children": [c for c in children if c is not None]}

    rendered = render(tree.root)
    return rendered if rendered is not None else {}


def emit_browse_json(tree: ConceptTree, assignment: LeafAssignment, path: str | Path) -> bytes:
    """Write the browse tree as canonical JSON; byte-identical across runs."""
    data = (
        json.dumps(render_browse(tree, assignment), sort_keys=True, ensure_ascii=False,
                   separators=(",", ":"))
        + "\n"
    ).encode("utf-8")
    Path(path).write_bytes(data)
    return data


def parse_browse_json(data: bytes | str) -> dict[str, list[tuple[str, float]]]:
    """Recover leaf-label → ranked researchers from an emitted browse file."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    recovered: dict[str, list[tuple[str, float]]] = {}

    def walk(node: dict) -> None:
        if "researchers" in node:
            recovered[node["label"]] = [(r["id"], r["score"]) for r in node["researchers"]]
        for child in node.get("children", ()):
            walk(child)

    payload = json.loads(data)
    if payload:
        walk(payload)
    return recovered
