"""Core data model: problem classes, agents, instances, matchings, stability.

All ids are contiguous 1-based integers within their role.  Preference lists
are stored as tuples of tie groups; a tie group is a tuple of agent ids.  The
rank of a partner is the 1-based index of its tie group, so strict lists have
one agent per group and rank equals list position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple, Optional

from .errors import InapplicableError


class ProblemClass(Enum):
    SM = "SM"
    HR = "HR"
    HA = "HA"
    CHA = "CHA"
    SR = "SR"
    SPA = "SPA"
    SPAS = "SPAS"


class Role(Enum):
    RESIDENT = "resident"
    HOSPITAL = "hospital"
    APPLICANT = "applicant"
    HOUSE = "house"
    ROOMMATE = "roommate"
    STUDENT = "student"
    PROJECT = "project"
    LECTURER = "lecturer"


class AgentId(NamedTuple):
    role: Role
    index: int  # 1-based

    def __repr__(self) -> str:
        return f"{self.role.value}{self.index}"


#: tuple of tie groups; each tie group is a tuple of AgentId
PreferenceList = tuple[tuple[AgentId, ...], ...]


class SubscriptionState(Enum):
    """Occupancy of an agent under a matching.

    Capacity-1 agents are reported as unassigned/assigned; only capacitated
    agents can be under-subscribed.
    """

    UNASSIGNED = "unassigned"
    ASSIGNED = "assigned"
    UNDER_SUBSCRIBED = "under-subscribed"
    FULL = "full"
    OVER_SUBSCRIBED = "over-subscribed"


class StabilityCriterion(Enum):
    WEAK = "weak"
    STRONG = "strong"
    SUPER = "super"


# Which roles carry preference lists, per problem class.  The target role of
# each list is fixed by the class (residents rank hospitals, and so on).
_CLASS_ROLES: dict[ProblemClass, tuple[Role, ...]] = {
    ProblemClass.SM: (Role.RESIDENT, Role.HOSPITAL),
    ProblemClass.HR: (Role.RESIDENT, Role.HOSPITAL),
    ProblemClass.HA: (Role.APPLICANT, Role.HOUSE),
    ProblemClass.CHA: (Role.APPLICANT, Role.HOUSE),
    ProblemClass.SR: (Role.ROOMMATE,),
    ProblemClass.SPA: (Role.STUDENT, Role.PROJECT, Role.LECTURER),
    ProblemClass.SPAS: (Role.STUDENT, Role.PROJECT, Role.LECTURER),
}

_PREF_TARGET: dict[Role, Role] = {
    Role.RESIDENT: Role.HOSPITAL,
    Role.HOSPITAL: Role.RESIDENT,
    Role.APPLICANT: Role.HOUSE,
    Role.ROOMMATE: Role.ROOMMATE,
    Role.STUDENT: Role.PROJECT,
    Role.LECTURER: Role.STUDENT,
}


@dataclass(frozen=True)
class Instance:
    """An immutable problem instance.

    counts: number of agents per role.
    capacities: positive capacity per agent (1 for unit-capacity roles).
    prefs: preference list per agent, for roles that have lists.
    project_owner: SPA/SPA-S only, maps each project to its lecturer.
    """

    problem_class: ProblemClass
    counts: Mapping[Role, int]
    capacities: Mapping[AgentId, int]
    prefs: Mapping[AgentId, PreferenceList]
    project_owner: Mapping[AgentId, AgentId] = field(default_factory=dict)
    _ranks: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._validate()
        ranks: dict[AgentId, dict[AgentId, int]] = {}
        for agent, plist in self.prefs.items():
            table: dict[AgentId, int] = {}
            for gi, group in enumerate(plist, start=1):
                for other in group:
                    table[other] = gi
            ranks[agent] = table
        object.__setattr__(self, "_ranks", ranks)

    # -- structure helpers -------------------------------------------------

    @property
    def roles(self) -> tuple[Role, ...]:
        return _CLASS_ROLES[self.problem_class]

    def agents(self, role: Role) -> Iterator[AgentId]:
        for i in range(1, self.counts.get(role, 0) + 1):
            yield AgentId(role, i)

    def capacity(self, agent: AgentId) -> int:
        return self.capacities.get(agent, 1)

    def pref(self, agent: AgentId) -> PreferenceList:
        return self.prefs.get(agent, ())

    def has_prefs(self, agent: AgentId) -> bool:
        return agent in self.prefs

    def owner(self, project: AgentId) -> AgentId:
        return self.project_owner[project]

    def lecturer_projects(self, lecturer: AgentId) -> list[AgentId]:
        return [p for p, l in self.project_owner.items() if l == lecturer]

    def rank(self, agent: AgentId, other: AgentId) -> Optional[int]:
        """1-based tie-group index of `other` in `agent`'s list, or None."""
        return self._ranks.get(agent, {}).get(other)

    def acceptable_pairs(self) -> Iterator[tuple[AgentId, AgentId]]:
        """Mutually acceptable (left, right) pairs, in id order.

        For SR the pair is oriented lower index first.
        """
        pc = self.problem_class
        if pc in (ProblemClass.SM, ProblemClass.HR):
            for r in self.agents(Role.RESIDENT):
                for group in self.pref(r):
                    for h in group:
                        if self.rank(h, r) is not None:
                            yield (r, h)
        elif pc in (ProblemClass.HA, ProblemClass.CHA):
            for a in self.agents(Role.APPLICANT):
                for group in self.pref(a):
                    for h in group:
                        yield (a, h)
        elif pc is ProblemClass.SR:
            for a in self.agents(Role.ROOMMATE):
                for group in self.pref(a):
                    for b in group:
                        if a.index < b.index and self.rank(b, a) is not None:
                            yield (a, b)
        else:  # SPA / SPAS
            for s in self.agents(Role.STUDENT):
                for group in self.pref(s):
                    for p in group:
                        if pc is ProblemClass.SPAS:
                            if self.rank(self.owner(p), s) is None:
                                continue
                        yield (s, p)

    def has_ties(self, role: Role) -> bool:
        return any(
            any(len(group) > 1 for group in self.pref(a)) for a in self.agents(role)
        )

    # -- validation --------------------------------------------------------

    def _validate(self):
        pc = self.problem_class
        roles = _CLASS_ROLES[pc]
        for role in roles:
            n = self.counts.get(role, 0)
            if n < 0:
                raise ValueError(f"negative count for {role.value}")
        for agent, cap in self.capacities.items():
            if cap < 1:
                raise ValueError(f"non-positive capacity for {agent}")
        if pc in (ProblemClass.SPA, ProblemClass.SPAS):
            for p in self.agents(Role.PROJECT):
                l = self.project_owner.get(p)
                if l is None:
                    raise ValueError(f"project {p.index} has no lecturer")
                if l.role is not Role.LECTURER or not (
                    1 <= l.index <= self.counts.get(Role.LECTURER, 0)
                ):
                    raise ValueError(f"project {p.index} has invalid lecturer {l}")
        for agent, plist in self.prefs.items():
            target = _PREF_TARGET[agent.role]
            seen: set[AgentId] = set()
            for group in plist:
                for other in group:
                    if other.role is not target:
                        raise ValueError(f"{agent} ranks {other} of wrong role")
                    if not (1 <= other.index <= self.counts.get(target, 0)):
                        raise ValueError(f"{agent} ranks unknown agent {other}")
                    if other == agent:
                        raise ValueError(f"{agent} ranks itself")
                    if other in seen:
                        raise ValueError(f"{agent} ranks {other} twice")
                    seen.add(other)


@dataclass(frozen=True)
class Matching:
    """A set of (left, right) pairs respecting capacities and acceptability."""

    instance: Instance
    pairs: frozenset[tuple[AgentId, AgentId]]
    _assigned: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        assigned: dict[AgentId, list[AgentId]] = {}
        for a, b in self.pairs:
            assigned.setdefault(a, []).append(b)
            assigned.setdefault(b, []).append(a)
        for agent, partners in assigned.items():
            partners.sort(key=lambda x: x.index)
            if len(partners) > self.instance.capacity(agent):
                raise ValueError(f"{agent} over capacity")
        inst = self.instance
        pc = inst.problem_class
        for a, b in self.pairs:
            if inst.rank(a, b) is None:
                raise ValueError(f"pair ({a}, {b}) not acceptable to {a}")
            if pc in (ProblemClass.SM, ProblemClass.HR, ProblemClass.SR):
                if inst.rank(b, a) is None:
                    raise ValueError(f"pair ({a}, {b}) not acceptable to {b}")
            if pc is ProblemClass.SPAS:
                if inst.rank(inst.owner(b), a) is None:
                    raise ValueError(f"pair ({a}, {b}) not ranked by the lecturer")
        if pc in (ProblemClass.SPA, ProblemClass.SPAS):
            for l in inst.agents(Role.LECTURER):
                load = sum(
                    len(assigned.get(p, ())) for p in inst.lecturer_projects(l)
                )
                if load > inst.capacity(l):
                    raise ValueError(f"{l} over capacity")
        object.__setattr__(self, "_assigned", assigned)

    def __eq__(self, other):
        return isinstance(other, Matching) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def assignees(self, agent: AgentId) -> tuple[AgentId, ...]:
        """Partners of `agent`, sorted by index.

        For a lecturer this is the students assigned across its projects.
        """
        if agent.role is Role.LECTURER:
            students: list[AgentId] = []
            for p in self.instance.lecturer_projects(agent):
                students.extend(self._assigned.get(p, ()))
            return tuple(sorted(students, key=lambda s: s.index))
        return tuple(self._assigned.get(agent, ()))

    def partner(self, agent: AgentId) -> Optional[AgentId]:
        """Single partner for unit-capacity agents (None when unmatched)."""
        partners = self._assigned.get(agent, ())
        return partners[0] if partners else None


def rank_of(instance: Instance, agent: AgentId, other: AgentId) -> Optional[int]:
    return instance.rank(agent, other)


def subscription_state(
    instance: Instance, matching: Matching, agent: AgentId
) -> SubscriptionState:
    k = len(matching.assignees(agent))
    cap = instance.capacity(agent)
    if k > cap:
        return SubscriptionState.OVER_SUBSCRIBED
    if cap == 1:
        return SubscriptionState.ASSIGNED if k else SubscriptionState.UNASSIGNED
    if k == cap:
        return SubscriptionState.FULL
    return SubscriptionState.UNDER_SUBSCRIBED


def _worst_rank(instance: Instance, matching: Matching, agent: AgentId) -> int:
    return max(instance.rank(agent, p) for p in matching.assignees(agent))


def _improves(
    instance: Instance,
    matching: Matching,
    agent: AgentId,
    candidate: AgentId,
    strict: bool,
) -> bool:
    """Would `agent` (weakly) rather take `candidate` than its worst assignee?

    Under-subscribed agents always improve.  With `strict` the candidate must
    beat the worst assignee outright; otherwise indifference is enough.
    """
    assigned = matching.assignees(agent)
    if len(assigned) < instance.capacity(agent):
        return True
    r = instance.rank(agent, candidate)
    worst = _worst_rank(instance, matching, agent)
    return r < worst if strict else r <= worst


def _spa_blocks(
    instance: Instance,
    matching: Matching,
    student: AgentId,
    project: AgentId,
    student_strict: bool,
    lecturer_strict: bool,
) -> bool:
    lecturer = instance.owner(project)
    # student side: unmatched, or (strictly) prefers the project
    current = matching.partner(student)
    if current is not None:
        r_new = instance.rank(student, project)
        r_cur = instance.rank(student, current)
        if student_strict:
            if r_new >= r_cur:
                return False
        else:
            if r_new > r_cur:
                return False
    p_load = len(matching.assignees(project))
    l_load = len(matching.assignees(lecturer))
    p_under = p_load < instance.capacity(project)
    l_under = l_load < instance.capacity(lecturer)
    if p_under and l_under:
        return True
    if p_under:  # lecturer full
        if current is not None and instance.owner(current) == lecturer:
            return True  # s would move between projects of the same lecturer
        worst = max(instance.rank(lecturer, s) for s in matching.assignees(lecturer))
        r = instance.rank(lecturer, student)
        return r < worst if lecturer_strict else r <= worst
    # project full: lecturer compares with the worst student on that project
    worst = max(instance.rank(lecturer, s) for s in matching.assignees(project))
    r = instance.rank(lecturer, student)
    return r < worst if lecturer_strict else r <= worst


def is_blocking_pair(
    instance: Instance,
    matching: Matching,
    pair: tuple[AgentId, AgentId],
    criterion: StabilityCriterion = StabilityCriterion.WEAK,
) -> bool:
    """Does `pair` block `matching` under the given criterion?

    Pairs already in the matching never block.  weak requires both sides to
    improve strictly, super lets both sides be indifferent, strong needs
    one strict and one weak improvement.
    """
    pc = instance.problem_class
    if pc in (ProblemClass.HA, ProblemClass.CHA):
        raise InapplicableError("blocking pairs are undefined for one-sided classes")
    a, b = pair
    if (a, b) in matching.pairs or (b, a) in matching.pairs:
        return False
    if instance.rank(a, b) is None:
        return False
    if pc is ProblemClass.SPAS:
        if instance.rank(instance.owner(b), a) is None:
            return False
        if criterion is StabilityCriterion.WEAK:
            return _spa_blocks(instance, matching, a, b, True, True)
        if criterion is StabilityCriterion.SUPER:
            return _spa_blocks(instance, matching, a, b, False, False)
        return _spa_blocks(instance, matching, a, b, True, False) or _spa_blocks(
            instance, matching, a, b, False, True
        )
    if pc is ProblemClass.SPA:
        raise InapplicableError("stability needs lecturer preference lists")
    if instance.rank(b, a) is None:
        return False
    if criterion is StabilityCriterion.WEAK:
        return _improves(instance, matching, a, b, True) and _improves(
            instance, matching, b, a, True
        )
    if criterion is StabilityCriterion.SUPER:
        return _improves(instance, matching, a, b, False) and _improves(
            instance, matching, b, a, False
        )
    return (
        _improves(instance, matching, a, b, True)
        and _improves(instance, matching, b, a, False)
    ) or (
        _improves(instance, matching, a, b, False)
        and _improves(instance, matching, b, a, True)
    )


def is_stable(
    instance: Instance,
    matching: Matching,
    criterion: StabilityCriterion = StabilityCriterion.WEAK,
) -> bool:
    """No acceptable pair blocks the matching under the criterion."""
    return not any(
        is_blocking_pair(instance, matching, pair, criterion)
        for pair in instance.acceptable_pairs()
    )


def make_matching(instance: Instance, pairs) -> Matching:
    return Matching(instance, frozenset(pairs))
