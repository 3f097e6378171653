"""Structural views of an instance's solution space.

`structural_graph` builds one of five artifacts: for tie-free complete
SM instances the rotation digraph (sparse precedence arcs), the rotation
poset (its transitive reduction) and the Hasse diagram of the stable
matchings under the dominance order; for tie-free SR instances the
rotation poset with its singular core and dual pairing; for CHA the
switching graph of a popular matching.  `emit_graph` renders any of them
as canonical JSON or dot text.
"""

from __future__ import annotations

import json

from . import onesided, roommates, twosided
from .errors import BudgetError
from .model import Instance, Role
from .structures import GraphEdge, GraphNode, StructureGraph

GRAPH_KINDS = (
    "sm-rotation-poset",
    "sm-rotation-digraph",
    "sm-hasse",
    "sr-rotation-poset",
    "cha-switching",
)

DEFAULT_SIZE_LIMIT = 12


def _pair_text(pairs, left: str, right: str) -> str:
    return " ".join(f"({left}{a.index}, {right}{b.index})" for a, b in pairs)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _cover_arcs(preds: list[set[int]]) -> list[tuple[int, int]]:
    """Transitive reduction of the reachability order over `preds`."""
    anc = twosided._pred_masks(preds)
    covers = []
    for t in range(len(preds)):
        dominated = 0
        for q in _bits(anc[t]):
            dominated |= anc[q]
        for p in _bits(anc[t] & ~dominated):
            covers.append((p, t))
    return covers


def _rotation_nodes(rotations) -> list[GraphNode]:
    return [
        GraphNode(f"r{t}", _pair_text(rho, "m", "w"), rho)
        for t, rho in enumerate(rotations)
    ]


def _sm_rotation_data(instance: Instance, size_limit: int):
    twosided._require_sm_shaped(instance)
    twosided._require_tie_free(instance)
    twosided._require_complete(instance)
    for side in (Role.RESIDENT, Role.HOSPITAL):
        if sum(1 for _ in instance.agents(side)) > size_limit:
            raise BudgetError(
                f"structural SM graphs are limited to {size_limit} agents per side"
            )
    return twosided.rotation_data(instance)


def _sm_digraph(instance: Instance, size_limit: int) -> StructureGraph:
    data = _sm_rotation_data(instance, size_limit)
    edges = [
        GraphEdge(f"r{p}", f"r{t}")
        for t, arcs in enumerate(data.preds)
        for p in arcs
    ]
    return StructureGraph.build(
        "sm-rotation-digraph", _rotation_nodes(data.rotations), edges
    )


def _sm_poset(instance: Instance, size_limit: int) -> StructureGraph:
    data = _sm_rotation_data(instance, size_limit)
    edges = [GraphEdge(f"r{p}", f"r{t}") for p, t in _cover_arcs(data.preds)]
    return StructureGraph.build(
        "sm-rotation-poset", _rotation_nodes(data.rotations), edges
    )


def _sm_hasse(instance: Instance, size_limit: int) -> StructureGraph:
    data = _sm_rotation_data(instance, size_limit)
    subsets = sorted(twosided.closed_subsets(data.preds), key=lambda s: (len(s), s))
    index = {s: i for i, s in enumerate(subsets)}
    nodes = []
    for s, i in index.items():
        partner = twosided.apply_rotations(data, s)
        pairs = sorted(partner.items(), key=lambda mw: mw[0].index)
        nodes.append(GraphNode(f"m{i}", _pair_text(pairs, "m", "w"), s))
    edges = []
    for s, i in index.items():
        chosen = set(s)
        for t, arcs in enumerate(data.preds):
            if t not in chosen and arcs <= chosen:
                above = tuple(sorted(s + (t,)))
                edges.append(GraphEdge(f"m{i}", f"m{index[above]}", f"r{t}"))
    return StructureGraph.build("sm-hasse", nodes, edges)


def _sr_poset(instance: Instance, size_limit: int) -> StructureGraph:
    roommates._require_sr(instance)
    roommates._require_tie_free(instance)
    if sum(1 for _ in instance.agents(Role.ROOMMATE)) > 2 * size_limit:
        raise BudgetError(
            f"the SR rotation poset is limited to {2 * size_limit} agents"
        )
    data = roommates.sr_rotation_poset(instance)
    partner = dict(data.duals)
    partner.update((b, a) for a, b in data.duals)
    nodes = []
    for t, rho in enumerate(data.rotations):
        payload = {
            "rotation": rho,
            "singular": t in data.singular,
            "dual": partner.get(t),
        }
        nodes.append(GraphNode(f"r{t}", _pair_text(rho, "a", "a"), payload))
    edges = [GraphEdge(f"r{p}", f"r{t}") for p, t in data.covers]
    return StructureGraph.build("sr-rotation-poset", nodes, edges)


_BUILDERS = {
    "sm-rotation-poset": _sm_poset,
    "sm-rotation-digraph": _sm_digraph,
    "sm-hasse": _sm_hasse,
    "sr-rotation-poset": _sr_poset,
    "cha-switching": lambda instance, size_limit: onesided.build_switching_graph(
        instance
    ),
}


def structural_graph(
    instance: Instance, kind: str, size_limit: int = DEFAULT_SIZE_LIMIT
) -> StructureGraph:
    """Build the named structure for a compatible instance.

    Raises ValueError for an unknown kind, InapplicableError when the
    instance's class, ties, or list shape rule the structure out,
    BudgetError past the size guard, and UnsolvableError when no stable
    (SR) or popular (CHA) matching exists.
    """
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown graph kind: {kind!r}") from None
    return builder(instance, size_limit)


def emit_graph(graph: StructureGraph, format: str) -> str:
    """Render a graph as `graph-json` (canonical, compact) or `dot`."""
    if format == "graph-json":
        return json.dumps(graph.to_json(), separators=(",", ":"))
    if format == "dot":
        return graph.to_dot()
    raise ValueError(f"unknown graph format: {format!r}")
