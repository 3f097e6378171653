"""Structural graph builders checked against enumeration and the oracle."""

import json
import random

import numpy as np
import pytest

from matchkit import ProblemClass, parse
from matchkit import oracle as orc
from matchkit.errors import BudgetError, InapplicableError, UnsolvableError
from matchkit.graphs import GRAPH_KINDS, emit_graph, structural_graph
from matchkit.model import Role
from matchkit.onesided import build_switching_graph
from matchkit.roommates import enumerate_stable_sr, sr_rotation_poset
from matchkit.twosided import (
    apply_rotations,
    closed_subsets,
    enumerate_stable,
    rotation_data,
)

BIG = 10**9

# two men, two women, opposed tastes: exactly two stable matchings
TWO_SM = "2 2\n1: 1 2\n2: 2 1\n1: 1: 2 1\n2: 1: 1 2"

# everyone gets their first choice: a single stable matching
UNIQUE_SM = "2 2\n1: 1 2\n2: 2 1\n1: 1: 1 2\n2: 1: 2 1"

# cyclic 4x4 instance whose lattice holds ten stable matchings
CYCLE_SM = "\n".join(
    [
        "4 4",
        "1: 1 2 3 4",
        "2: 2 1 4 3",
        "3: 3 4 1 2",
        "4: 4 3 2 1",
        "1: 1: 4 3 2 1",
        "2: 1: 3 4 1 2",
        "3: 1: 2 1 4 3",
        "4: 1: 1 2 3 4",
    ]
)

# two agents who accept each other: one stable matching, no rotations
PAIR_SR = "2\n2\n1"

# cyclic tastes: no stable matching
CYCLE3_SR = "3\n2 3\n3 1\n1 2"

# complete instance with three stable matchings over two dual pairs
SIX_SR = "6\n3 5 6 2 4\n5 6 4 1 3\n2 5 6 1 4\n1 3 5 6 2\n3 1 4 6 2\n4 2 3 1 5"

# three stable matchings reached through four-agent rotation cycles
GI8 = "\n".join(
    [
        "8",
        "2 5 4 6 7 8 3",
        "3 6 1 7 8 5 4",
        "4 7 2 8 5 6 1",
        "1 8 3 5 6 7 2",
        "6 1 8 2 3 4 7",
        "7 2 5 3 4 1 8",
        "8 3 6 4 1 2 5",
        "5 4 7 1 2 3 6",
    ]
)

# six stable matchings whose rotation selections form no chain of flips
HARD8 = "\n".join(
    [
        "8",
        "6 8 5 3",
        "7 5 8 6 4",
        "4 7 8 6 1",
        "5 7 3 2 6",
        "8 1 2 4 7 6",
        "4 3 5 1 2",
        "8 4 5 2 3",
        "2 1 3 7 5",
    ]
)

# three chained rotations; the direct arc r0 -> r2 is transitively redundant
REDUNDANT_SM = "\n".join(
    [
        "5 5",
        "1: 3 4 5 1 2",
        "2: 4 1 2 5 3",
        "3: 2 4 5 3 1",
        "4: 1 3 4 2 5",
        "5: 5 4 3 2 1",
        "1: 1: 5 2 1 3 4",
        "2: 1: 3 4 5 1 2",
        "3: 1: 2 5 1 3 4",
        "4: 1: 3 1 4 5 2",
        "5: 1: 3 4 1 5 2",
    ]
)

HA_TWO = "2 2\n1: 1 2\n2: 1 2\n1: 1\n2: 1"
HA_NOPOP = "3 2\n1: 1 2\n2: 1 2\n3: 1 2\n1: 1\n2: 1"


def sm(text):
    return parse(text, ProblemClass.SM)


def sr(text):
    return parse(text, ProblemClass.SR)


def ha(text):
    return parse(text, ProblemClass.HA)


def _random_sm(rng, n):
    rows = [f"{n} {n}"]
    for i in range(n):
        order = rng.permutation(n) + 1
        rows.append(f"{i + 1}: " + " ".join(str(x) for x in order))
    for j in range(n):
        order = rng.permutation(n) + 1
        rows.append(f"{j + 1}: 1: " + " ".join(str(x) for x in order))
    return sm("\n".join(rows))


def random_sr(rng, n, density):
    ok = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ok[(i, j)] = rng.random() < density
    lines = [str(n)]
    for i in range(1, n + 1):
        others = [j for j in range(1, n + 1) if j != i and ok[tuple(sorted((i, j)))]]
        rng.shuffle(others)
        lines.append(" ".join(str(x) for x in others))
    return sr("\n".join(lines))


def _ids(graph):
    return [n.id for n in graph.nodes]


def _arc_ints(graph, prefix="r"):
    return {
        (int(e.source[len(prefix):]), int(e.target[len(prefix):]))
        for e in graph.edges
    }


def _closure(n, arcs):
    reach = [set() for _ in range(n)]
    for t in range(n):
        for p, q in arcs:
            if q == t:
                reach[t] |= reach[p] | {p}
    return {(p, t) for t in range(n) for p in reach[t]}


def _rank_vector(inst, partner):
    men = sorted(inst.agents(Role.RESIDENT), key=lambda a: a.index)
    return tuple(inst.rank(m, partner[m]) if m in partner else BIG for m in men)


# --- frozen examples -------------------------------------------------------


def test_two_stable_sm_poset_and_hasse():
    inst = sm(TWO_SM)
    poset = structural_graph(inst, "sm-rotation-poset")
    assert _ids(poset) == ["r0"] and poset.edges == ()
    assert poset.nodes[0].label == "(m1, w1) (m2, w2)"
    hasse = structural_graph(inst, "sm-hasse")
    assert emit_graph(hasse, "graph-json") == (
        '{"name":"sm-hasse","directed":true,'
        '"nodes":[{"id":"m0","label":"(m1, w1) (m2, w2)"},'
        '{"id":"m1","label":"(m1, w2) (m2, w1)"}],'
        '"edges":[{"source":"m0","target":"m1","label":"r0"}]}'
    )


def test_unique_stable_sm_empty_poset_single_node_hasse():
    inst = sm(UNIQUE_SM)
    assert emit_graph(structural_graph(inst, "sm-rotation-poset"), "graph-json") == (
        '{"name":"sm-rotation-poset","directed":true,"nodes":[],"edges":[]}'
    )
    hasse = structural_graph(inst, "sm-hasse")
    assert len(hasse.nodes) == 1 and hasse.edges == ()
    assert hasse.nodes[0].label == "(m1, w1) (m2, w2)"


def test_two_stable_hasse_dot_text():
    dot = emit_graph(structural_graph(sm(TWO_SM), "sm-hasse"), "dot")
    assert dot == (
        'digraph "sm-hasse" {\n'
        '  "m0" [label="(m1, w1) (m2, w2)"];\n'
        '  "m1" [label="(m1, w2) (m2, w1)"];\n'
        '  "m0" -> "m1" [label="r0"];\n'
        "}"
    )


def test_cycle_sm_counts():
    inst = sm(CYCLE_SM)
    hasse = structural_graph(inst, "sm-hasse")
    assert len(hasse.nodes) == 10
    assert len(orc.stable_matchings(inst)) == 10


def test_graph_json_round_trip():
    for text, kind in ((TWO_SM, "sm-hasse"), (SIX_SR, "sr-rotation-poset")):
        inst = parse(text, ProblemClass.SM if kind[:2] == "sm" else ProblemClass.SR)
        graph = structural_graph(inst, kind)
        assert json.loads(emit_graph(graph, "graph-json")) == graph.to_json()


# --- SM counting and lattice structure -------------------------------------


def test_random_sm_counts_agree_everywhere():
    rng = np.random.default_rng(4242)
    for _ in range(40):
        inst = _random_sm(rng, int(rng.integers(2, 8)))
        data = rotation_data(inst)
        subsets = list(closed_subsets(data.preds))
        hasse = structural_graph(inst, "sm-hasse")
        oracle = {frozenset(m.pairs) for m in orc.stable_matchings(inst)}
        assert len(hasse.nodes) == len(subsets) == len(oracle)
        for method in ("rotation-elimination", "break-marriage"):
            found, truncated = enumerate_stable(inst, method)
            assert not truncated
            assert len(found) == len(oracle)
        built = {
            frozenset(apply_rotations(data, s).items()) for s in subsets
        }
        assert built == oracle


def test_hasse_has_unique_source_and_sink():
    rng = np.random.default_rng(515)
    for _ in range(25):
        inst = _random_sm(rng, int(rng.integers(2, 7)))
        hasse = structural_graph(inst, "sm-hasse")
        if len(hasse.nodes) == 1:
            assert hasse.edges == ()
            continue
        incoming = {e.target for e in hasse.edges}
        outgoing = {e.source for e in hasse.edges}
        sources = [n.id for n in hasse.nodes if n.id not in incoming]
        sinks = [n.id for n in hasse.nodes if n.id not in outgoing]
        assert sources == ["m0"]
        assert len(sinks) == 1
        # source holds the proposer-optimal matching: every other node's
        # rank vector is componentwise at least as bad
        data = rotation_data(inst)
        by_id = {n.id: _rank_vector(inst, apply_rotations(data, n.payload))
                 for n in hasse.nodes}
        best = by_id["m0"]
        worst = by_id[sinks[0]]
        for vec in by_id.values():
            assert all(b <= v for b, v in zip(best, vec))
            assert all(v <= w for v, w in zip(vec, worst))


def test_hasse_is_transitive_reduction_of_dominance():
    rng = np.random.default_rng(626)
    for _ in range(20):
        inst = _random_sm(rng, int(rng.integers(2, 7)))
        hasse = structural_graph(inst, "sm-hasse")
        data = rotation_data(inst)
        vec = {
            int(n.id[1:]): _rank_vector(inst, apply_rotations(data, n.payload))
            for n in hasse.nodes
        }
        dominance = {
            (i, j)
            for i in vec
            for j in vec
            if i != j and all(a <= b for a, b in zip(vec[i], vec[j]))
        }
        arcs = _arc_ints(hasse, "m")
        assert arcs <= dominance
        assert _closure(len(vec), arcs) == dominance
        covers = {
            (i, j)
            for i, j in dominance
            if not any((i, k) in dominance and (k, j) in dominance for k in vec)
        }
        assert arcs == covers


def test_redundant_arc_dropped_from_poset():
    inst = sm(REDUNDANT_SM)
    digraph = structural_graph(inst, "sm-rotation-digraph")
    poset = structural_graph(inst, "sm-rotation-poset")
    assert _arc_ints(digraph) == {(0, 1), (0, 2), (1, 2)}
    assert _arc_ints(poset) == {(0, 1), (1, 2)}


def test_poset_is_reduction_of_digraph():
    rng = np.random.default_rng(737)
    checked = 0
    for _ in range(30):
        inst = _random_sm(rng, int(rng.integers(5, 10)))
        poset = structural_graph(inst, "sm-rotation-poset")
        digraph = structural_graph(inst, "sm-rotation-digraph")
        assert _ids(poset) == _ids(digraph)
        assert [n.label for n in poset.nodes] == [n.label for n in digraph.nodes]
        sparse = _arc_ints(digraph)
        covers = _arc_ints(poset)
        assert covers <= sparse
        n = len(poset.nodes)
        assert _closure(n, covers) == _closure(n, sparse)
        # covers carry no shortcuts
        closure = _closure(n, covers)
        for p, t in covers:
            assert not any((p, k) in closure and (k, t) in closure for k in range(n))
        if covers != sparse:
            checked += 1
    assert checked >= 1


def test_rotation_moves_proposers_down_receivers_up():
    rng = np.random.default_rng(848)
    for _ in range(25):
        inst = _random_sm(rng, int(rng.integers(2, 8)))
        data = rotation_data(inst)
        for s in closed_subsets(data.preds):
            chosen = set(s)
            partner = apply_rotations(data, s)
            for t, rho in enumerate(data.rotations):
                if t in chosen or not data.preds[t] <= chosen:
                    continue
                size = len(rho)
                for i in range(size):
                    m, w = rho[i]
                    assert partner[m] == w
                    w_next = rho[(i + 1) % size][1]
                    m_prev = rho[(i - 1) % size][0]
                    assert inst.rank(m, w_next) > inst.rank(m, w)
                    assert inst.rank(w, m_prev) < inst.rank(w, m)


# --- SR rotation poset -----------------------------------------------------


def _complete_closed_count(data):
    preds = [set() for _ in data.rotations]
    for p, t in data.covers:
        preds[t].add(p)
    singular = set(data.singular)
    total = 0
    for subset in closed_subsets(preds):
        chosen = set(subset)
        if singular <= chosen and all(
            (a in chosen) != (b in chosen) for a, b in data.duals
        ):
            total += 1
    return total


def test_six_sr_poset_frozen():
    graph = structural_graph(sr(SIX_SR), "sr-rotation-poset")
    assert _ids(graph) == ["r0", "r1", "r2", "r3"]
    assert [n.label for n in graph.nodes] == [
        "(a1, a5) (a3, a2)",
        "(a2, a6) (a4, a1)",
        "(a1, a2) (a6, a4)",
        "(a2, a1) (a5, a3)",
    ]
    assert _arc_ints(graph) == {(0, 2), (1, 3)}
    assert [n.payload["dual"] for n in graph.nodes] == [3, 2, 1, 0]
    assert not any(n.payload["singular"] for n in graph.nodes)


def test_sr_poset_counts_on_fixed_instances():
    for text, rotations, dual_pairs, stables in (
        (PAIR_SR, 0, 0, 1),
        (SIX_SR, 4, 2, 3),
        (GI8, 4, 2, 3),
        (HARD8, 8, 4, 6),
    ):
        data = sr_rotation_poset(sr(text))
        assert len(data.rotations) == rotations
        assert len(data.duals) == dual_pairs
        assert len(data.singular) + 2 * dual_pairs == rotations
        assert data.stable_count == stables
        assert _complete_closed_count(data) == stables
        found, _ = enumerate_stable_sr(sr(text))
        assert len(found) == stables


def test_sr_poset_random_matches_enumeration_and_oracle():
    rng = random.Random(31415)
    solvable = 0
    with_duals = 0
    for _ in range(80):
        inst = random_sr(rng, rng.choice([4, 6, 8]), rng.uniform(0.6, 1.0))
        try:
            data = sr_rotation_poset(inst)
        except UnsolvableError:
            assert not orc.stable_matchings(inst)
            continue
        solvable += 1
        with_duals += bool(data.duals)
        found, _ = enumerate_stable_sr(inst)
        assert data.stable_count == len(found)
        assert _complete_closed_count(data) == len(found)
        assert len(orc.stable_matchings(inst)) == len(found)
        graph = structural_graph(inst, "sr-rotation-poset")
        assert len(graph.nodes) == len(data.rotations)
        assert _arc_ints(graph) == set(data.covers)
        duals = {(n.payload["dual"], i) for i, n in enumerate(graph.nodes)
                 if n.payload["dual"] is not None}
        assert {tuple(sorted(p)) for p in duals} == set(data.duals)
    assert solvable > 25
    assert with_duals > 5


def test_sr_unsolvable_raises():
    with pytest.raises(UnsolvableError, match="no stable matching"):
        structural_graph(sr(CYCLE3_SR), "sr-rotation-poset")


# --- switching graph delegation --------------------------------------------


def test_cha_switching_delegates():
    inst = ha(HA_TWO)
    direct = build_switching_graph(inst)
    via = structural_graph(inst, "cha-switching")
    assert via.to_json() == direct.to_json()
    assert via.name == "cha-switching"


def test_cha_switching_unsolvable_raises():
    with pytest.raises(UnsolvableError, match="no popular matching"):
        structural_graph(ha(HA_NOPOP), "cha-switching")


# --- guards ----------------------------------------------------------------


def test_unknown_kind_and_format_raise_value_error():
    assert len(GRAPH_KINDS) == 5
    with pytest.raises(ValueError, match="unknown graph kind"):
        structural_graph(sm(TWO_SM), "sm-lattice")
    graph = structural_graph(sm(TWO_SM), "sm-hasse")
    with pytest.raises(ValueError, match="unknown graph format"):
        emit_graph(graph, "svg")


def test_class_mismatch_is_inapplicable():
    for kind in ("sm-rotation-poset", "sm-rotation-digraph", "sm-hasse"):
        with pytest.raises(InapplicableError):
            structural_graph(sr(SIX_SR), kind)
    with pytest.raises(InapplicableError):
        structural_graph(sm(TWO_SM), "sr-rotation-poset")
    with pytest.raises(InapplicableError):
        structural_graph(sm(TWO_SM), "cha-switching")


def test_ties_and_incomplete_lists_are_inapplicable():
    tied = sm("2 2\n1: (1 2)\n2: 2 1\n1: 1: 2 1\n2: 1: 1 2")
    with pytest.raises(InapplicableError, match="strict"):
        structural_graph(tied, "sm-rotation-poset")
    short = sm("2 2\n1: 1\n2: 2 1\n1: 1: 2 1\n2: 1: 1 2")
    with pytest.raises(InapplicableError, match="complete"):
        structural_graph(short, "sm-hasse")
    tied_sr = sr("3\n(2 3)\n1\n1")
    with pytest.raises(InapplicableError, match="strict"):
        structural_graph(tied_sr, "sr-rotation-poset")


def test_size_guard_raises_budget_error():
    with pytest.raises(BudgetError):
        structural_graph(sm(TWO_SM), "sm-hasse", size_limit=1)
    with pytest.raises(BudgetError):
        structural_graph(sr(SIX_SR), "sr-rotation-poset", size_limit=2)
    n = 13
    rows = [f"{n} {n}"]
    order = " ".join(str(j) for j in range(1, n + 1))
    rows += [f"{i}: {order}" for i in range(1, n + 1)]
    rows += [f"{j}: 1: {order}" for j in range(1, n + 1)]
    with pytest.raises(BudgetError):
        structural_graph(sm("\n".join(rows)), "sm-rotation-poset")


def test_error_kinds_are_distinct():
    kinds = (InapplicableError, UnsolvableError, BudgetError)
    for a in kinds:
        for b in kinds:
            if a is not b:
                assert not issubclass(a, b)
