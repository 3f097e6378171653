"""Algorithms for one-sided preference instances (house allocation).

Profile objectives are solved with a rank-weighted flow: weights grow
exponentially with preference rank so that comparing total weight agrees
with lexicographic profile comparison, using exact big-int arithmetic.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple, Optional

import numpy as np

from .errors import InapplicableError, UnsolvableError
from .flownet import FlowNetwork
from .model import AgentId, Instance, Matching, ProblemClass, Role, make_matching
from .structures import GraphEdge, GraphNode, StructureGraph

PROFILE_OBJECTIVES = ("min-cost", "rank-maximal", "greedy", "generous", "greedy-generous")


def _check_onesided(instance: Instance) -> None:
    if instance.problem_class not in (ProblemClass.HA, ProblemClass.CHA):
        raise InapplicableError("requires a house allocation instance")


def _applicants(instance: Instance) -> list[AgentId]:
    return [a for a in instance.agents(Role.APPLICANT)]


def _max_rank(instance: Instance) -> int:
    return max(
        (len(instance.pref(a)) for a in _applicants(instance)), default=0
    )


def serial_dictatorship(instance: Instance, order=None) -> Matching:
    """Applicants take their best remaining house one at a time."""
    _check_onesided(instance)
    applicants = _applicants(instance)
    if order is None:
        order = applicants
    else:
        order = list(order)
        if sorted(order) != sorted(applicants):
            raise ValueError("order must be a permutation of the applicants")
    free = {h: instance.capacity(h) for h in instance.agents(Role.HOUSE)}
    pairs = []
    for a in order:
        for group in instance.pref(a):
            chosen = next((h for h in group if free[h] > 0), None)
            if chosen is not None:
                free[chosen] -= 1
                pairs.append((a, chosen))
                break
    return make_matching(instance, pairs)


def _rank_weights(objective: str, n_agents: int, max_rank: int):
    # base n+1 keeps rank counts (at most n) from carrying between digits
    base = n_agents + 1
    big = base ** (max_rank + 1)
    if objective == "min-cost":
        return lambda k: big - k
    if objective == "rank-maximal":
        return lambda k: base ** (max_rank - k)
    if objective in ("greedy", "greedy-generous"):
        # every greedy-optimal maximum matching shares one profile, so the
        # generous refinement cannot separate them further
        return lambda k: big + base ** (max_rank - k)
    if objective == "generous":
        return lambda k: big - base ** (k - 1)
    raise ValueError(f"unknown objective {objective!r}")


def profile_optimal_max(instance: Instance, objective: str) -> Matching:
    """Best matching for a profile objective, via rank-weighted flow."""
    _check_onesided(instance)
    applicants = _applicants(instance)
    houses = list(instance.agents(Role.HOUSE))
    max_rank = _max_rank(instance)
    if max_rank == 0:
        return make_matching(instance, [])
    weight = _rank_weights(objective, len(applicants), max_rank)

    node = {a: i + 1 for i, a in enumerate(applicants)}
    for h in houses:
        node[h] = len(node) + 1
    source, sink = 0, len(node) + 1
    net = FlowNetwork(len(node) + 2)
    for a in applicants:
        net.add_edge(source, node[a], 1)
    for h in houses:
        net.add_edge(node[h], sink, instance.capacity(h))
    pair_edges = []
    for a in applicants:
        for rank, group in enumerate(instance.pref(a), start=1):
            for h in group:
                eid = net.add_edge(node[a], node[h], 1, cost=-weight(rank))
                pair_edges.append((a, h, eid))
    net.run(source, sink, improve_only=True)
    pairs = [(a, h) for a, h, eid in pair_edges if net.flow_on(eid)]
    return make_matching(instance, pairs)


def max_pareto_optimal(instance: Instance) -> Matching:
    """Maximum cardinality matching no other matching Pareto-dominates.

    A minimum cost maximum matching qualifies: any Pareto improvement
    would strictly lower the total cost at equal size.
    """
    return profile_optimal_max(instance, "min-cost")


class PostLabels(NamedTuple):
    """First and second target houses used by the popularity reduction.

    second[a] is None when the fallback is the applicant's own last
    resort, i.e. remaining unmatched.
    """

    first: dict[AgentId, AgentId]
    second: dict[AgentId, Optional[AgentId]]
    first_counts: dict[AgentId, int]
    full: frozenset[AgentId]


def post_labels(instance: Instance) -> PostLabels:
    _check_onesided(instance)
    if instance.has_ties(Role.APPLICANT):
        raise InapplicableError("popularity machinery requires strict lists")
    first: dict[AgentId, AgentId] = {}
    counts: dict[AgentId, int] = {}
    for a in _applicants(instance):
        plist = instance.pref(a)
        if not plist:
            continue
        top = plist[0][0]
        first[a] = top
        counts[top] = counts.get(top, 0) + 1
    full = frozenset(
        h for h, c in counts.items() if c >= instance.capacity(h)
    )
    second: dict[AgentId, Optional[AgentId]] = {}
    for a in first:
        second[a] = next(
            (
                h
                for group in instance.pref(a)
                for h in group
                if h not in full
            ),
            None,
        )
    return PostLabels(first, second, counts, full)


def find_popular(instance: Instance) -> Optional[Matching]:
    """A popular matching, or None when the instance admits none.

    Reduction: every applicant must sit at their first choice or at
    their best house that is not fully demanded by first choices, and
    each fully demanded house must be filled with first-choice
    applicants.  A cost bonus steers the flow toward filling those
    houses whenever an applicant-perfect assignment allows it.
    """
    labels = post_labels(instance)
    active = sorted(labels.first, key=lambda a: a.index)
    houses = list(instance.agents(Role.HOUSE))
    node = {a: i + 1 for i, a in enumerate(active)}
    for h in houses:
        node[h] = len(node) + 1
    source, sink = 0, len(node) + 1
    net = FlowNetwork(len(node) + 2)
    house_edge = {}
    for h in houses:
        cost = -1 if h in labels.full else 0
        house_edge[h] = net.add_edge(node[h], sink, instance.capacity(h), cost)
    pair_edges = []
    for a in active:
        net.add_edge(source, node[a], 1)
        f, s = labels.first[a], labels.second[a]
        eid = net.add_edge(node[a], node[f], 1)
        pair_edges.append((a, f, eid))
        if s is None:
            net.add_edge(node[a], sink, 1)  # stays unmatched
        elif s != f:
            eid = net.add_edge(node[a], node[s], 1)
            pair_edges.append((a, s, eid))
    flow, _ = net.run(source, sink)
    if flow < len(active):
        return None
    for h in labels.full:
        if net.flow_on(house_edge[h]) < instance.capacity(h):
            return None
    pairs = [(a, h) for a, h, eid in pair_edges if net.flow_on(eid)]
    return make_matching(instance, pairs)


class SwitchArc(NamedTuple):
    """One applicant's only possible move between their two posts.

    source/target of None stand for the applicant's own last resort
    (being unmatched).
    """

    applicant: AgentId
    source: Optional[AgentId]
    target: Optional[AgentId]
    from_second: bool  # applicant currently sits at their fallback post


def switch_arcs(instance: Instance) -> Optional[tuple[Matching, list[SwitchArc]]]:
    """Base popular matching plus the move arcs of its switching graph."""
    base = find_popular(instance)
    if base is None:
        return None
    labels = post_labels(instance)
    arcs = []
    for a in sorted(labels.first, key=lambda x: x.index):
        f, s = labels.first[a], labels.second[a]
        if s == f:
            continue  # single reduced option, the applicant cannot move
        current = base.partner(a)
        at_second = current == s
        other = f if at_second else s
        arcs.append(SwitchArc(a, current, other, at_second))
    return base, arcs


def _vkey(post: Optional[AgentId], applicant: AgentId):
    if post is None:
        return (1, applicant.index)
    return (0, post.index)


class _Components(NamedTuple):
    base: Matching
    arcs: list[SwitchArc]
    # per component: ordered list of options, each a tuple of arc indices
    options: list[list[tuple[int, ...]]]


def _require_unit_caps(instance: Instance) -> None:
    if any(instance.capacity(h) != 1 for h in instance.agents(Role.HOUSE)):
        raise InapplicableError(
            "popular matching derivatives require unit house capacities"
        )


def _switch_components(instance: Instance) -> Optional[_Components]:
    _require_unit_caps(instance)
    found = switch_arcs(instance)
    if found is None:
        return None
    base, arcs = found
    out_arc: dict[tuple, int] = {}
    verts: set[tuple] = set()
    for i, arc in enumerate(arcs):
        src = _vkey(arc.source, arc.applicant)
        dst = _vkey(arc.target, arc.applicant)
        out_arc[src] = i  # unit capacities: one occupant, one move
        verts.add(src)
        verts.add(dst)

    comp_id: dict[tuple, int] = {}
    members: list[list[tuple]] = []
    for v in sorted(verts):
        if v in comp_id:
            continue
        cid = len(members)
        stack, seen = [v], [v]
        comp_id[v] = cid
        while stack:
            u = stack.pop()
            nexts = []
            if u in out_arc:
                arc = arcs[out_arc[u]]
                nexts.append(_vkey(arc.target, arc.applicant))
            for j, arc in enumerate(arcs):
                if _vkey(arc.target, arc.applicant) == u:
                    nexts.append(_vkey(arc.source, arc.applicant))
            for w in nexts:
                if w not in comp_id:
                    comp_id[w] = cid
                    seen.append(w)
                    stack.append(w)
        members.append(sorted(seen))

    options: list[list[tuple[int, ...]]] = []
    for verts_in_comp in members:
        # detect a directed cycle by walking the unique out-edges
        walk = []
        seen_at: dict[tuple, int] = {}
        v = verts_in_comp[0]
        cycle: Optional[list[int]] = None
        while v in out_arc:
            if v in seen_at:
                cycle = walk[seen_at[v]:]
                break
            seen_at[v] = len(walk)
            walk.append(out_arc[v])
            v = _vkey(arcs[out_arc[v]].target, arcs[out_arc[v]].applicant)
        comp_options: list[tuple[int, ...]] = [()]
        if cycle is not None:
            comp_options.append(tuple(cycle))
        else:
            starts = [
                out_arc[u]
                for u in verts_in_comp
                if u in out_arc and arcs[out_arc[u]].from_second
            ]
            for start in sorted(starts):
                path = []
                u = _vkey(arcs[start].source, arcs[start].applicant)
                while u in out_arc:
                    path.append(out_arc[u])
                    u = _vkey(arcs[out_arc[u]].target, arcs[out_arc[u]].applicant)
                comp_options.append(tuple(path))
        options.append(comp_options)
    return _Components(base, arcs, options)


def _apply_arcs(instance: Instance, comp: _Components, chosen: tuple[tuple[int, ...], ...]) -> Matching:
    pairs = set(comp.base.pairs)
    for option in chosen:
        for idx in option:
            arc = comp.arcs[idx]
            if arc.source is not None:
                pairs.discard((arc.applicant, arc.source))
            if arc.target is not None:
                pairs.add((arc.applicant, arc.target))
    return make_matching(instance, pairs)


def count_popular(instance: Instance) -> int:
    comp = _switch_components(instance)
    if comp is None:
        return 0
    total = 1
    for opts in comp.options:
        total *= len(opts)
    return total


def enumerate_popular(instance: Instance, cap: Optional[int] = None) -> tuple[list[Matching], bool]:
    """All popular matchings (up to cap); second value flags truncation."""
    comp = _switch_components(instance)
    if comp is None:
        return [], False
    out: list[Matching] = []
    for chosen in itertools.product(*comp.options):
        if cap is not None and len(out) >= cap:
            return out, True
        out.append(_apply_arcs(instance, comp, chosen))
    return out, False


def popular_pairs(instance: Instance) -> set[tuple[AgentId, AgentId]]:
    comp = _switch_components(instance)
    if comp is None:
        return set()
    pairs = set(comp.base.pairs)
    for opts in comp.options:
        for option in opts:
            for idx in option:
                arc = comp.arcs[idx]
                if arc.target is not None:
                    pairs.add((arc.applicant, arc.target))
    return pairs


def _option_score(instance: Instance, comp: _Components, option: tuple[int, ...], weight) -> int:
    score = 0
    for idx in option:
        arc = comp.arcs[idx]
        if arc.source is not None:
            score -= weight(instance.rank(arc.applicant, arc.source))
        if arc.target is not None:
            score += weight(instance.rank(arc.applicant, arc.target))
    return score


def popular_select(instance: Instance, criterion: str, seed=None) -> Optional[Matching]:
    """Optimize a criterion over all popular matchings.

    uniform-random draws every popular matching with equal probability,
    deterministically for a fixed seed.
    """
    comp = _switch_components(instance)
    if comp is None:
        return None
    if criterion == "uniform-random":
        rng = np.random.default_rng(seed)
        chosen = tuple(
            opts[int(rng.integers(len(opts)))] for opts in comp.options
        )
        return _apply_arcs(instance, comp, chosen)

    n = len(_applicants(instance))
    max_rank = _max_rank(instance)
    base = n + 1
    big = base ** (max_rank + 1)
    if criterion == "rank-maximal":
        weight = lambda k: base ** (max_rank - k)  # noqa: E731
    elif criterion == "generous-maxcard":
        weight = lambda k: big - base ** (k - 1)  # noqa: E731
    elif criterion == "mincost-maxcard":
        weight = lambda k: big - k  # noqa: E731
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    chosen = tuple(
        max(opts, key=lambda o: _option_score(instance, comp, o, weight))
        for opts in comp.options
    )
    return _apply_arcs(instance, comp, chosen)


def build_switching_graph(instance: Instance) -> StructureGraph:
    """Move graph over houses relative to a base popular matching."""
    found = switch_arcs(instance)
    if found is None:
        raise UnsolvableError("no popular matching exists")
    base, arcs = found
    usage = {h: len(base.assignees(h)) for h in instance.agents(Role.HOUSE)}
    nodes = [
        GraphNode(f"h{h.index}", f"h{h.index} ({usage[h]}/{instance.capacity(h)})")
        for h in instance.agents(Role.HOUSE)
    ]
    seen_last_resort = set()
    edges = []
    for arc in arcs:
        ends = []
        for post in (arc.source, arc.target):
            if post is None:
                key = f"l{arc.applicant.index}"
                if key not in seen_last_resort:
                    seen_last_resort.add(key)
                    nodes.append(GraphNode(key, f"l(a{arc.applicant.index})"))
                ends.append(key)
            else:
                ends.append(f"h{post.index}")
        edges.append(GraphEdge(ends[0], ends[1], f"a{arc.applicant.index}"))
    return StructureGraph.build("cha-switching", nodes, edges)
