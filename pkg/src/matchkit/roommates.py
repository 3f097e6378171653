"""Stable roommates solvers: partitions, optima, and enumeration.

The partition machinery runs a proposal phase and then eliminates
rotations on a shared symmetric table.  Where a plain solver would stop
because some list runs empty, the table instead gives up the odd cycle
responsible and carries on, so every instance yields a reduced stable
partition.  Matching-valued operations require strict lists; the
partition consumes ties by refining them in index order.
"""

from __future__ import annotations

from collections import Counter, deque
from typing import NamedTuple, Optional

from .errors import BudgetError, InapplicableError, UnsolvableError
from .metrics import compute_stats
from .model import (
    AgentId,
    Instance,
    Matching,
    ProblemClass,
    Role,
    make_matching,
)

SR_OBJECTIVES = ("min-regret", "egalitarian")

_BIG = 10**9


class StablePartition(NamedTuple):
    """Cycles covering every agent; fixed points are singleton cycles.

    Each agent weakly prefers its successor to its predecessor, and no
    two agents in different positions strictly prefer each other to
    their predecessors.  The partition is reduced: even cycles longer
    than two never appear.
    """

    cycles: tuple[tuple[AgentId, ...], ...]

    def successor(self, agent: AgentId) -> AgentId:
        for cycle in self.cycles:
            if agent in cycle:
                return cycle[(cycle.index(agent) + 1) % len(cycle)]
        raise KeyError(agent)

    def predecessor(self, agent: AgentId) -> AgentId:
        for cycle in self.cycles:
            if agent in cycle:
                return cycle[cycle.index(agent) - 1]
        raise KeyError(agent)

    @property
    def odd_cycles(self) -> tuple[tuple[AgentId, ...], ...]:
        """Cycles of odd length, singletons included."""
        return tuple(c for c in self.cycles if len(c) % 2 == 1)

    @property
    def solvable(self) -> bool:
        """True when no odd cycle longer than one is present."""
        return all(len(c) == 1 or len(c) % 2 == 0 for c in self.cycles)


def _require_sr(instance: Instance) -> None:
    if instance.problem_class is not ProblemClass.SR:
        raise InapplicableError("this algorithm needs a roommates instance")


def _require_tie_free(instance: Instance) -> None:
    if instance.has_ties(Role.ROOMMATE):
        raise InapplicableError("this algorithm requires strict preference lists")


def _strict_lists(instance: Instance) -> dict[AgentId, list[AgentId]]:
    """Strict, mutually acceptable lists; ties refined in index order."""
    lists: dict[AgentId, list[AgentId]] = {}
    for a in instance.agents(Role.ROOMMATE):
        flat = [
            b
            for group in instance.pref(a)
            for b in sorted(group, key=lambda x: x.index)
        ]
        lists[a] = [b for b in flat if instance.rank(b, a) is not None]
    return lists


class _Table(object):
    """Symmetric preference table under pair deletions.

    Maintains the classic coupling of the proposal phase: every agent
    with a non-empty list proposes to the first entry, is held by the
    last, and a holder discards everything it likes less than its best
    proposer.  `_converge` restores the coupling after deletions.
    """

    def __init__(self, lists: dict[AgentId, list[AgentId]]):
        self.agents = sorted(lists, key=lambda a: a.index)
        self.rank = {
            a: {b: i for i, b in enumerate(lst, start=1)}
            for a, lst in lists.items()
        }
        self.alive = {a: list(lst) for a, lst in lists.items()}
        self.tgt: dict[AgentId, AgentId] = {}
        self.holds: dict[AgentId, AgentId] = {}
        self.queue: deque[AgentId] = deque(self.agents)
        self.queued = set(self.agents)
        self._converge()

    def size(self, a: AgentId) -> int:
        return len(self.alive[a])

    def first(self, a: AgentId) -> Optional[AgentId]:
        lst = self.alive[a]
        return lst[0] if lst else None

    def second(self, a: AgentId) -> Optional[AgentId]:
        lst = self.alive[a]
        return lst[1] if len(lst) > 1 else None

    def last(self, a: AgentId) -> Optional[AgentId]:
        lst = self.alive[a]
        return lst[-1] if lst else None

    def _enqueue(self, a: AgentId) -> None:
        if a not in self.queued:
            self.queued.add(a)
            self.queue.append(a)

    def delete(self, a: AgentId, b: AgentId) -> None:
        self.alive[a].remove(b)
        self.alive[b].remove(a)
        for x, y in ((a, b), (b, a)):
            if self.tgt.get(x) == y:
                del self.tgt[x]
                self._enqueue(x)
            if self.holds.get(x) == y:
                del self.holds[x]

    def _converge(self) -> None:
        while self.queue:
            a = self.queue.popleft()
            self.queued.discard(a)
            while True:
                lst = self.alive[a]
                if not lst:
                    break
                b = lst[0]
                if self.tgt.get(a) == b and self.holds.get(b) == a:
                    break
                h = self.holds.get(b)
                if h == a:
                    self.tgt[a] = b
                    break
                if h is None or self.rank[b][a] < self.rank[b][h]:
                    self.holds[b] = a
                    self.tgt[a] = b
                    worse = [z for z in self.alive[b] if self.rank[b][z] > self.rank[b][a]]
                    for z in worse:
                        self.delete(b, z)
                    break
                # b keeps its better proposer
                self.delete(a, b)


def _exposed_rotation(
    table: _Table, start: AgentId
) -> tuple[list[AgentId], list[AgentId]]:
    """Walk second/last pointers from `start` until a cycle closes."""
    pos: dict[AgentId, int] = {}
    seq: list[AgentId] = []
    p = start
    while p not in pos:
        pos[p] = len(seq)
        seq.append(p)
        q = table.second(p)
        assert q is not None
        p = table.last(q)
        assert p is not None
    xs = seq[pos[p] :]
    ys = [table.second(x) for x in xs]
    return xs, ys


def _reduce(table: _Table) -> list[tuple[AgentId, ...]]:
    """Eliminate rotations until all lists have at most one entry.

    An elimination that would empty a list is not applied; the cycle of
    first pointers through the rotation base is removed from the table
    instead and reported as an odd cycle of the partition.
    """
    parties: list[tuple[AgentId, ...]] = []
    while True:
        start = None
        for a in table.agents:
            if table.size(a) >= 2:
                start = a
                break
        if start is None:
            return parties
        xs, ys = _exposed_rotation(table, start)
        dels: list[tuple[AgentId, AgentId]] = []
        seen: set[frozenset] = set()
        losses: Counter = Counter()
        for x, y in zip(xs, ys):
            thr = table.rank[y][x]
            for z in table.alive[y]:
                if table.rank[y][z] > thr and frozenset((y, z)) not in seen:
                    seen.add(frozenset((y, z)))
                    dels.append((y, z))
                    losses[y] += 1
                    losses[z] += 1
        if all(table.size(a) > losses[a] for a in losses):
            for y, z in dels:
                table.delete(y, z)
            table._converge()
            continue
        base = xs[0]
        cycle = [base]
        cur = table.first(base)
        while cur != base:
            cycle.append(cur)
            cur = table.first(cur)
        assert len(cycle) >= 3 and len(cycle) % 2 == 1
        parties.append(tuple(cycle))
        for a in cycle:
            for b in list(table.alive[a]):
                table.delete(a, b)
        table._converge()


def _partition_cycles(
    lists: dict[AgentId, list[AgentId]]
) -> tuple[tuple[AgentId, ...], ...]:
    table = _Table(lists)
    parties = _reduce(table)
    in_party = {a for c in parties for a in c}
    cycles: list[tuple[AgentId, ...]] = list(parties)
    for a in table.agents:
        if table.size(a) == 1:
            b = table.first(a)
            assert table.first(b) == a
            if a.index < b.index:
                cycles.append((a, b))
        elif table.size(a) == 0 and a not in in_party:
            cycles.append((a,))

    def canon(c: tuple[AgentId, ...]) -> tuple[AgentId, ...]:
        i = min(range(len(c)), key=lambda k: c[k].index)
        return c[i:] + c[:i]

    return tuple(sorted((canon(c) for c in cycles), key=lambda c: c[0].index))


def tan_hsueh(instance: Instance) -> StablePartition:
    """Reduced stable partition of a roommates instance.

    Always succeeds; ties are broken toward lower indices before the
    table is built.  The odd cycles of the result are the obstructions
    to a complete stable matching.
    """
    _require_sr(instance)
    return StablePartition(_partition_cycles(_strict_lists(instance)))


def irving_stable(instance: Instance) -> Optional[Matching]:
    """A stable matching of a strict roommates instance, or None.

    The partition route decides solvability: an odd cycle longer than
    one rules out any stable matching, otherwise the two-cycles pair up.
    """
    _require_sr(instance)
    _require_tie_free(instance)
    cycles = _partition_cycles(_strict_lists(instance))
    if any(len(c) > 1 and len(c) % 2 == 1 for c in cycles):
        return None
    return make_matching(
        instance, [(c[0], c[1]) for c in cycles if len(c) == 2]
    )


def max_stable_sr(instance: Instance) -> Matching:
    """Largest matching whose matched agents form a stable sub-instance.

    Deletes the lowest-index agent of each odd non-singleton cycle and
    re-solves until the residual partition is all pairs and singletons.
    """
    _require_sr(instance)
    _require_tie_free(instance)
    lists = _strict_lists(instance)
    while True:
        cycles = _partition_cycles(lists)
        bad = [c for c in cycles if len(c) > 1 and len(c) % 2 == 1]
        if not bad:
            break
        doomed = {min(c, key=lambda a: a.index) for c in bad}
        lists = {
            a: [b for b in lst if b not in doomed]
            for a, lst in lists.items()
            if a not in doomed
        }
    return make_matching(
        instance, [(c[0], c[1]) for c in cycles if len(c) == 2]
    )


# ---------------------------------------------------------------------------
# enumeration and enumeration-backed optima


def _rank_vector_key(instance: Instance, matching: Matching, agents) -> tuple:
    return tuple(
        instance.rank(a, matching.partner(a)) if matching.partner(a) else _BIG
        for a in agents
    )


def _stable_search(instance: Instance, limit: Optional[int]) -> list[Matching]:
    """Backtracking over assignments in index order, pruning blocked states.

    Once an agent is decided its situation only matters against other
    decided agents, so any blocking pair among them kills the branch.
    """
    agents = sorted(instance.agents(Role.ROOMMATE), key=lambda a: a.index)
    options = {
        a: [
            b
            for group in instance.pref(a)
            for b in group
            if instance.rank(b, a) is not None
        ]
        for a in agents
    }
    partner: dict[AgentId, Optional[AgentId]] = {}
    out: list[Matching] = []

    def blocked(v: AgentId) -> bool:
        rv = instance.rank(v, partner[v]) if partner[v] else _BIG
        for c, pc in partner.items():
            if c == v:
                continue
            r1 = instance.rank(v, c)
            if r1 is None or r1 >= rv:
                continue
            r2 = instance.rank(c, v)
            rc = instance.rank(c, pc) if pc else _BIG
            if r2 is not None and r2 < rc:
                return True
        return False

    def rec(k: int) -> bool:
        while k < len(agents) and agents[k] in partner:
            k += 1
        if k == len(agents):
            pairs = [
                (a, b)
                for a, b in partner.items()
                if b is not None and a.index < b.index
            ]
            out.append(make_matching(instance, pairs))
            return limit is not None and len(out) >= limit
        a = agents[k]
        for b in options[a]:
            if b in partner:
                continue
            partner[a] = b
            partner[b] = a
            if not blocked(a) and not blocked(b):
                if rec(k + 1):
                    return True
            del partner[a]
            del partner[b]
        partner[a] = None
        if not blocked(a):
            if rec(k + 1):
                return True
        del partner[a]
        return False

    rec(0)
    return out


def enumerate_stable_sr(
    instance: Instance, cap: Optional[int] = None
) -> tuple[list[Matching], bool]:
    """All stable matchings, sorted by the vector of partner ranks.

    With `cap` at most cap matchings are returned and the flag reports
    truncation; a truncated listing is only sorted within what the
    search visited.
    """
    _require_sr(instance)
    _require_tie_free(instance)
    limit = None if cap is None else max(cap, 0) + 1
    found = _stable_search(instance, limit)
    truncated = limit is not None and len(found) >= limit
    if truncated:
        found = found[: limit - 1]
    agents = sorted(instance.agents(Role.ROOMMATE), key=lambda a: a.index)
    found.sort(key=lambda m: _rank_vector_key(instance, m, agents))
    return found, truncated


def all_stable_pairs_sr(instance: Instance) -> frozenset:
    """Pairs that appear in at least one stable matching."""
    found, _ = enumerate_stable_sr(instance)
    return frozenset(p for m in found for p in m.pairs)


def optimal_stable_sr(instance: Instance, objective: str) -> Optional[Matching]:
    """Best stable matching for the objective, or None when unsolvable.

    min-regret minimises the worst partner rank over matched agents,
    egalitarian the total of both partners' ranks.
    """
    if objective not in SR_OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    _require_sr(instance)
    _require_tie_free(instance)
    found, _ = enumerate_stable_sr(instance)
    if not found:
        return None
    if objective == "min-regret":
        return min(found, key=lambda m: compute_stats(instance, m).total_regret)
    return min(found, key=lambda m: compute_stats(instance, m).total_cost)


# ---------------------------------------------------------------------------
# rotation poset

_STATE_CAP = 50_000


class SrPosetData(NamedTuple):
    """Rotation poset of a solvable strict roommates instance.

    `rotations[t]` is a cycle of (agent, held partner) pairs whose
    elimination moves every member to its next partner; indices are a
    topological order of the precedence covers.  Rotations in `singular`
    are eliminated by every elimination order; the rest pair up in
    `duals`, each rotation with its reversal, and every elimination
    order removes exactly one side of each pair.  The stable matchings,
    `stable_count` of them, are exactly the predecessor-closed subsets
    that contain the singular core and one side of every dual pair.
    """

    rotations: tuple[tuple, ...]
    covers: tuple[tuple[int, int], ...]
    singular: tuple[int, ...]
    duals: tuple[tuple[int, int], ...]
    stable_count: int


def _table_state(table: _Table) -> tuple:
    return tuple(tuple(b.index for b in table.alive[a]) for a in table.agents)


def _exposed_rotations(table: _Table) -> list[tuple]:
    """Every distinct rotation exposed in a stable table, canonicalised.

    A rotation is recorded as its cycle of (agent, first entry) pairs,
    rotated so the lowest-index agent leads.
    """
    found: dict[tuple, None] = {}
    for a in table.agents:
        if table.size(a) < 2:
            continue
        xs, _ = _exposed_rotation(table, a)
        pairs = tuple((x, table.first(x)) for x in xs)
        k = min(range(len(pairs)), key=lambda i: pairs[i][0].index)
        found.setdefault(pairs[k:] + pairs[:k], None)
    return list(found)


def _eliminate_rotation(table: _Table, rot: tuple) -> None:
    # each successor's holder truncates strictly below its predecessor
    size = len(rot)
    dels: list[tuple[AgentId, AgentId]] = []
    seen: set[frozenset] = set()
    for i in range(size):
        x = rot[i][0]
        y = rot[(i + 1) % size][1]
        thr = table.rank[y][x]
        for z in table.alive[y]:
            if table.rank[y][z] > thr and frozenset((y, z)) not in seen:
                seen.add(frozenset((y, z)))
                dels.append((y, z))
    for y, z in dels:
        table.delete(y, z)
    table._converge()


def _rot_key(rot: tuple) -> tuple:
    return tuple((x.index, y.index) for x, y in rot)


def _canon_rotation(pairs: tuple) -> tuple:
    k = min(range(len(pairs)), key=lambda i: pairs[i][0].index)
    return pairs[k:] + pairs[:k]


def _dual_rotation(rot: tuple) -> tuple:
    # the same cycle read from the holders' side: each holder moves to
    # the member preceding its current one
    size = len(rot)
    return _canon_rotation(
        tuple((rot[i][1], rot[(i - 1) % size][0]) for i in range(size))
    )


def sr_rotation_poset(instance: Instance) -> SrPosetData:
    """Precedence structure of the phase-2 rotations.

    Explores every elimination order from the phase-1 table.  A
    rotation precedes another when every order that removes the second
    has already removed the first; the cover arcs of that relation,
    together with the dual pairing, determine the stable matchings as
    described on SrPosetData.
    """
    _require_sr(instance)
    _require_tie_free(instance)
    if irving_stable(instance) is None:
        raise UnsolvableError("no stable matching exists")
    lists = _strict_lists(instance)
    agents = sorted(lists, key=lambda a: a.index)
    by_index = {a.index: a for a in agents}

    def rebuild(state: tuple) -> _Table:
        return _Table(
            {a: [by_index[j] for j in row] for a, row in zip(agents, state)}
        )

    start = _table_state(_Table(lists))
    eliminated: dict[tuple, frozenset] = {start: frozenset()}
    queue: deque[tuple] = deque([start])
    terminal: dict[tuple, frozenset] = {}
    before: dict[tuple, frozenset] = {}
    while queue:
        state = queue.popleft()
        rotations = _exposed_rotations(rebuild(state))
        if not rotations:
            terminal[state] = eliminated[state]
            continue
        for rot in rotations:
            done = eliminated[state]
            before[rot] = done if rot not in before else before[rot] & done
            table = rebuild(state)
            _eliminate_rotation(table, rot)
            child = _table_state(table)
            reached = done | {rot}
            if child in eliminated:
                assert eliminated[child] == reached, "rotation bookkeeping out of step"
                continue
            if len(eliminated) > _STATE_CAP:
                raise BudgetError("rotation poset search exceeded its budget")
            eliminated[child] = reached
            queue.append(child)

    fam = list(terminal.values())
    count = len(fam)
    core = frozenset.intersection(*fam)
    every = frozenset().union(*fam)
    assert set(before) == set(every), "rotation exposed but never eliminated"

    # each rotation outside the core is the reversal of another; the
    # core's reversals never become rotations at all
    for rot in every:
        dual = _dual_rotation(rot)
        if rot in core:
            assert dual not in before, "core rotation with a live reversal"
        else:
            assert dual in every and dual not in core, "unpaired rotation"
            assert all((rot in f) != (dual in f) for f in fam), "pairing broken"

    anc = {rot: before[rot] for rot in every}
    ordered = sorted(every, key=lambda r: (len(anc[r]), _rot_key(r)))
    index = {rot: i for i, rot in enumerate(ordered)}
    covers = []
    for rot in every:
        for pre in anc[rot]:
            if not any(pre in anc[mid] for mid in anc[rot]):
                covers.append((index[pre], index[rot]))
    duals = sorted(
        {tuple(sorted((index[r], index[_dual_rotation(r)]))) for r in every - core}
    )
    return SrPosetData(
        tuple(ordered),
        tuple(sorted(covers)),
        tuple(sorted(index[r] for r in core)),
        tuple(duals),
        count,
    )
