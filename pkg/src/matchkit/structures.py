"""Serializable node/edge graphs attached to algorithm results.

A StructureGraph is the neutral form behind every structural view:
switching graphs, rotation digraphs and posets, and stable-matching
lattice diagrams.  Nodes may carry an arbitrary payload for in-process
consumers; serialization keeps only ids and labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: str
    payload: Any = field(default=None, compare=False)


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    label: str = ""


def _natural(key: str):
    # sort h2 before h10
    return (len(key), key)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True)
class StructureGraph:
    name: str
    directed: bool
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    @classmethod
    def build(cls, name, nodes, edges, directed: bool = True) -> "StructureGraph":
        nodes = tuple(sorted(nodes, key=lambda n: _natural(n.id)))
        edges = tuple(
            sorted(edges, key=lambda e: (_natural(e.source), _natural(e.target), e.label))
        )
        ids = [n.id for n in nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        for e in edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"edge endpoint missing: {e.source} -> {e.target}")
        return cls(name, directed, nodes, edges)

    def node(self, node_id: str) -> GraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def to_json(self) -> dict:
        # field order is part of the wire format
        return {
            "name": self.name,
            "directed": self.directed,
            "nodes": [{"id": n.id, "label": n.label} for n in self.nodes],
            "edges": [
                {"source": e.source, "target": e.target, "label": e.label}
                for e in self.edges
            ],
        }

    def to_dot(self) -> str:
        head = "digraph" if self.directed else "graph"
        arrow = "->" if self.directed else "--"
        lines = [f"{head} {_quote(self.name)} {{"]
        for n in self.nodes:
            lines.append(f"  {_quote(n.id)} [label={_quote(n.label)}];")
        for e in self.edges:
            suffix = f" [label={_quote(e.label)}]" if e.label else ""
            lines.append(f"  {_quote(e.source)} {arrow} {_quote(e.target)}{suffix};")
        lines.append("}")
        return "\n".join(lines)
