"""Algorithms for student-project allocation instances.

The profile objectives reuse the rank-weighted flow idea from the house
allocation module, with one extra twist: flow runs student -> project ->
lecturer -> sink so that project and lecturer capacities bind as two
serial layers.  The stable-matching routines implement deferred
acceptance from either side of the market.
"""

from __future__ import annotations

from collections import deque

from .errors import InapplicableError
from .flownet import FlowNetwork
from .model import (
    AgentId,
    Instance,
    Matching,
    ProblemClass,
    Role,
    make_matching,
)
from .onesided import _rank_weights

SPA_OBJECTIVES = ("min-cost", "greedy", "generous")
SPAS_SIDES = ("student", "lecturer")


def _require_spa(instance: Instance) -> None:
    if instance.problem_class not in (ProblemClass.SPA, ProblemClass.SPAS):
        raise InapplicableError("requires a student-project allocation instance")


def _require_spas(instance: Instance) -> None:
    _require_spa(instance)
    if instance.problem_class is not ProblemClass.SPAS:
        raise InapplicableError("stability needs lecturer preference lists")
    if instance.has_ties(Role.STUDENT) or instance.has_ties(Role.LECTURER):
        raise InapplicableError("this algorithm requires strict preference lists")


def _acceptable(instance: Instance) -> dict[AgentId, list[AgentId]]:
    """Ordered acceptable projects per student (mutual when lecturers rank)."""
    out: dict[AgentId, list[AgentId]] = {
        s: [] for s in instance.agents(Role.STUDENT)
    }
    for s, p in instance.acceptable_pairs():
        out[s].append(p)
    return out


def spa_profile_opt(instance: Instance, objective: str) -> Matching:
    """Best maximum matching for a student-profile objective."""
    _require_spa(instance)
    if objective not in SPA_OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    students = list(instance.agents(Role.STUDENT))
    max_rank = max((len(instance.pref(s)) for s in students), default=0)
    if max_rank == 0:
        return make_matching(instance, [])
    weight = _rank_weights(objective, len(students), max_rank)

    node: dict[AgentId, int] = {}
    for role in (Role.STUDENT, Role.PROJECT, Role.LECTURER):
        for agent in instance.agents(role):
            node[agent] = len(node) + 1
    source, sink = 0, len(node) + 1
    net = FlowNetwork(len(node) + 2)
    for s in students:
        net.add_edge(source, node[s], 1)
    for p in instance.agents(Role.PROJECT):
        net.add_edge(node[p], node[instance.owner(p)], instance.capacity(p))
    for l in instance.agents(Role.LECTURER):
        net.add_edge(node[l], sink, instance.capacity(l))
    pair_edges = []
    for s, p in instance.acceptable_pairs():
        eid = net.add_edge(
            node[s], node[p], 1, cost=-weight(instance.rank(s, p))
        )
        pair_edges.append((s, p, eid))
    net.run(source, sink, improve_only=True)
    return make_matching(
        instance, [(s, p) for s, p, eid in pair_edges if net.flow_on(eid)]
    )


def spa_s_stable(instance: Instance, optimal_for: str = "student") -> Matching:
    """Stable matching favouring one side of the market.

    Student mode gives every student their best assignment over all
    stable matchings; lecturer mode is the symmetric worst case.
    """
    _require_spas(instance)
    if optimal_for not in SPAS_SIDES:
        raise ValueError(f"unknown side {optimal_for!r}")
    if optimal_for == "student":
        return _student_optimal(instance)
    return _lecturer_optimal(instance)


def _student_optimal(instance: Instance) -> Matching:
    """Student-proposing deferred acceptance.

    Lecturers bump their worst assignee when a project or their own
    quota overfills, and the losing pair along with every weaker one is
    deleted so each student walks down their list exactly once.
    """
    acceptable = _acceptable(instance)
    alive = {s: set(ps) for s, ps in acceptable.items()}
    pointer = {s: 0 for s in acceptable}
    lec_list = {
        l: [s for g in instance.pref(l) for s in g]
        for l in instance.agents(Role.LECTURER)
    }
    assign: dict[AgentId, AgentId] = {}
    on_project: dict[AgentId, list[AgentId]] = {
        p: [] for p in instance.agents(Role.PROJECT)
    }
    with_lecturer: dict[AgentId, list[AgentId]] = {
        l: [] for l in instance.agents(Role.LECTURER)
    }
    free = deque(acceptable)

    def worst(members: list[AgentId], l: AgentId) -> AgentId:
        return max(members, key=lambda t: instance.rank(l, t))

    def bump(w: AgentId) -> None:
        p_w = assign.pop(w)
        on_project[p_w].remove(w)
        with_lecturer[instance.owner(p_w)].remove(w)
        free.append(w)

    while free:
        s = free.popleft()
        choices = acceptable[s]
        while pointer[s] < len(choices) and choices[pointer[s]] not in alive[s]:
            pointer[s] += 1
        if pointer[s] == len(choices):
            continue  # list exhausted, s stays unassigned
        p = choices[pointer[s]]
        l = instance.owner(p)
        assign[s] = p
        on_project[p].append(s)
        with_lecturer[l].append(s)
        if len(on_project[p]) > instance.capacity(p):
            bump(worst(on_project[p], l))
        elif len(with_lecturer[l]) > instance.capacity(l):
            bump(worst(with_lecturer[l], l))
        if len(on_project[p]) == instance.capacity(p):
            w = worst(on_project[p], l)
            for s2 in lec_list[l][lec_list[l].index(w) + 1:]:
                alive[s2].discard(p)
        if len(with_lecturer[l]) == instance.capacity(l):
            w = worst(with_lecturer[l], l)
            projects = instance.lecturer_projects(l)
            for s2 in lec_list[l][lec_list[l].index(w) + 1:]:
                alive[s2].difference_update(projects)
    return make_matching(instance, assign.items())


def _lecturer_optimal(instance: Instance) -> Matching:
    """Lecturer-proposing deferred acceptance.

    Offers scan lecturers by index; each under-subscribed lecturer
    offers its best-ranked willing student that student's favourite
    spare project.  Students accept every strict improvement, and their
    weaker list entries are deleted so assignments only move up.
    """
    acceptable = _acceptable(instance)
    alive = {s: set(ps) for s, ps in acceptable.items()}
    lec_list = {
        l: [s for g in instance.pref(l) for s in g]
        for l in instance.agents(Role.LECTURER)
    }
    assign: dict[AgentId, AgentId] = {}
    on_project = {p: 0 for p in instance.agents(Role.PROJECT)}
    of_lecturer = {l: 0 for l in instance.agents(Role.LECTURER)}

    def next_offer():
        for l in instance.agents(Role.LECTURER):
            if of_lecturer[l] >= instance.capacity(l):
                continue
            for s in lec_list[l]:
                current = assign.get(s)
                cur_rank = (
                    instance.rank(s, current) if current is not None else None
                )
                for p in acceptable[s]:
                    if p not in alive[s] or instance.owner(p) != l:
                        continue
                    if on_project[p] >= instance.capacity(p):
                        continue
                    if cur_rank is not None and instance.rank(s, p) >= cur_rank:
                        continue
                    return l, s, p
        return None

    while True:
        offer = next_offer()
        if offer is None:
            break
        l, s, p = offer
        current = assign.get(s)
        if current is not None:
            on_project[current] -= 1
            of_lecturer[instance.owner(current)] -= 1
        assign[s] = p
        on_project[p] += 1
        of_lecturer[l] += 1
        r = instance.rank(s, p)
        for p2 in acceptable[s]:
            if instance.rank(s, p2) > r:
                alive[s].discard(p2)
    return make_matching(instance, assign.items())
