"""Algorithms for the two-sided classes: deferred acceptance and relatives.

The module covers the tie-free workhorses (proposer-optimal deferred
acceptance, the rotation machinery behind egalitarian / minimum regret /
enumeration queries) as well as the tie-aware ones (super-stability,
strong stability, two approximation variants for maximum weakly stable
matchings) and a maximum popular matching routine for incomplete lists.

Rank conventions follow the rest of the package: ranks are 1-based tie
group indices and lower is better.  Matched pairs are always stored as
(resident, hospital) regardless of which side proposed.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple, Optional

from .errors import InapplicableError, MatchkitError
from .flownet import FlowNetwork
from .model import (
    AgentId,
    Instance,
    Matching,
    ProblemClass,
    Role,
    StabilityCriterion,
    is_stable,
    make_matching,
)

PROPOSER_SIDES = ("residents", "hospitals")
TIE_SIDES = ("one-sided", "two-sided")
SM_OBJECTIVES = ("egalitarian", "min-regret", "min-regret-M", "min-regret-W")
ENUM_METHODS = ("break-marriage", "rotation-elimination")


def _require_two_sided(instance: Instance) -> None:
    if instance.problem_class not in (ProblemClass.SM, ProblemClass.HR):
        raise InapplicableError(
            f"two-sided algorithms do not apply to {instance.problem_class.value}"
        )


def _require_tie_free(instance: Instance) -> None:
    if instance.has_ties(Role.RESIDENT) or instance.has_ties(Role.HOSPITAL):
        raise InapplicableError("this algorithm requires strict preference lists")


def _require_sm_shaped(instance: Instance) -> None:
    _require_two_sided(instance)
    for side in (Role.RESIDENT, Role.HOSPITAL):
        for agent in instance.agents(side):
            if instance.capacity(agent) != 1:
                raise InapplicableError("this algorithm requires unit capacities")


def _require_complete(instance: Instance) -> None:
    n_res = sum(1 for _ in instance.agents(Role.RESIDENT))
    n_hos = sum(1 for _ in instance.agents(Role.HOSPITAL))
    for role, other in ((Role.RESIDENT, n_hos), (Role.HOSPITAL, n_res)):
        for agent in instance.agents(role):
            if sum(len(g) for g in instance.pref(agent)) != other:
                raise InapplicableError(
                    "this algorithm requires complete preference lists"
                )


def _strict(instance: Instance, agent: AgentId) -> list[AgentId]:
    # flattened strict list; callers guarantee the absence of ties
    out: list[AgentId] = []
    for group in instance.pref(agent):
        out.extend(sorted(group, key=lambda a: a.index))
    return out


def _by_index(agents) -> list[AgentId]:
    return sorted(agents, key=lambda a: a.index)


# ---------------------------------------------------------------------------
# deferred acceptance


def gale_shapley(instance: Instance, proposers: str = "residents") -> Matching:
    """Proposer-optimal stable matching via deferred acceptance.

    Works for SM and HR shaped instances without ties.  `proposers`
    selects which side makes offers; the result is optimal for that side
    and pessimal for the other.
    """
    _require_two_sided(instance)
    if proposers not in PROPOSER_SIDES:
        raise ValueError(f"unknown proposer side {proposers!r}")
    _require_tie_free(instance)
    prop_role = Role.RESIDENT if proposers == "residents" else Role.HOSPITAL
    assigned = _deferred_acceptance(instance, prop_role)
    if prop_role is Role.RESIDENT:
        pairs = [(p, r) for p, held in assigned.items() for r in held]
    else:
        pairs = [(r, p) for p, held in assigned.items() for r in held]
    return make_matching(instance, pairs)


def _deferred_acceptance(
    instance: Instance, prop_role: Role
) -> dict[AgentId, set[AgentId]]:
    """Run deferred acceptance; returns proposer -> accepted receivers."""
    recv_role = Role.HOSPITAL if prop_role is Role.RESIDENT else Role.RESIDENT
    props = _by_index(instance.agents(prop_role))
    lists = {p: _strict(instance, p) for p in props}
    ptr = {p: 0 for p in props}
    slots = {p: instance.capacity(p) for p in props}
    assigned: dict[AgentId, set[AgentId]] = {p: set() for p in props}
    held: dict[AgentId, list[AgentId]] = {
        r: [] for r in instance.agents(recv_role)
    }
    queue = deque(props)
    queued = {p: True for p in props}
    while queue:
        p = queue.popleft()
        queued[p] = False
        while len(assigned[p]) < slots[p] and ptr[p] < len(lists[p]):
            recv = lists[p][ptr[p]]
            ptr[p] += 1
            rank_p = instance.rank(recv, p)
            if rank_p is None:
                continue
            if len(held[recv]) < instance.capacity(recv):
                held[recv].append(p)
                assigned[p].add(recv)
                continue
            worst = max(held[recv], key=lambda q: instance.rank(recv, q))
            if rank_p < instance.rank(recv, worst):
                held[recv].remove(worst)
                assigned[worst].discard(recv)
                held[recv].append(p)
                assigned[p].add(recv)
                if not queued[worst]:
                    queue.append(worst)
                    queued[worst] = True
    return assigned


# ---------------------------------------------------------------------------
# rotation machinery for SM shaped tie-free instances


class RotationData(NamedTuple):
    """Rotations of an SM-shaped instance plus their precedence digraph.

    `rotations[t]` is a cycle ((m0, w0), ..., (mk-1, wk-1)): eliminating
    it moves each m_i from w_i to w_{i+1 mod k}.  `preds[t]` holds the
    direct predecessors of rotation t; reachability over those arcs is
    the rotation partial order, and the stable matchings correspond
    exactly to its closed (predecessor-closed) subsets.  Rotation indices
    are a topological order.
    """

    man_optimal: dict[AgentId, AgentId]
    rotations: list[tuple[tuple[AgentId, AgentId], ...]]
    preds: list[set[int]]


def rotation_data(instance: Instance) -> RotationData:
    _require_sm_shaped(instance)
    _require_tie_free(instance)
    men = _by_index(instance.agents(Role.RESIDENT))
    mlists = {m: _strict(instance, m) for m in men}
    wranks = {
        w: {m: instance.rank(w, m) for g in instance.pref(w) for m in g}
        for w in instance.agents(Role.HOSPITAL)
    }
    wlists = {w: _strict(instance, w) for w in wranks}

    # man-oriented extended deferred acceptance with deletions
    deleted: set[tuple[AgentId, AgentId]] = set()
    holder: dict[AgentId, Optional[AgentId]] = {w: None for w in wranks}
    head = {m: 0 for m in men}
    queue = deque(men)
    while queue:
        m = queue.popleft()
        lst = mlists[m]
        while head[m] < len(lst) and (m, lst[head[m]]) in deleted:
            head[m] += 1
        if head[m] >= len(lst):
            continue
        w = lst[head[m]]
        cur = holder[w]
        if cur is not None and wranks[w][cur] < wranks[w][m]:
            deleted.add((m, w))
            queue.append(m)
            continue
        holder[w] = m
        if cur is not None:
            deleted.add((cur, w))
            queue.append(cur)
        for m2 in wlists[w]:
            if wranks[w][m2] > wranks[w][m] and (m2, w) not in deleted:
                deleted.add((m2, w))

    man_optimal: dict[AgentId, AgentId] = {}
    for w, m in holder.items():
        if m is not None:
            man_optimal[m] = w

    def advance(m: AgentId) -> None:
        lst = mlists[m]
        while head[m] < len(lst) and (m, lst[head[m]]) in deleted:
            head[m] += 1

    def second(m: AgentId) -> Optional[AgentId]:
        lst = mlists[m]
        i = head[m] + 1
        while i < len(lst) and (m, lst[i]) in deleted:
            i += 1
        return lst[i] if i < len(lst) else None

    for m in men:
        advance(m)

    rotations: list[tuple[tuple[AgentId, AgentId], ...]] = []
    preds: list[set[int]] = []
    producer: dict[tuple[AgentId, AgentId], int] = {}
    eliminator: dict[tuple[AgentId, AgentId], int] = {}

    while True:
        seen_dead: set[AgentId] = set()
        cycle: Optional[list[AgentId]] = None
        for start in men:
            if start in seen_dead or second(start) is None:
                continue
            walk: list[AgentId] = []
            pos: dict[AgentId, int] = {}
            m = start
            while True:
                if m in pos:
                    cycle = walk[pos[m]:]
                    break
                w2 = None if m in seen_dead else second(m)
                # a second choice with no holder is matched in no stable
                # matching here, so the walk cannot continue through it
                if w2 is None or holder[w2] is None:
                    seen_dead.update(walk)
                    seen_dead.add(m)
                    break
                pos[m] = len(walk)
                walk.append(m)
                m = holder[w2]
            if cycle is not None:
                break
        if cycle is None:
            break

        k = min(range(len(cycle)), key=lambda i: cycle[i].index)
        cycle = cycle[k:] + cycle[:k]
        rho = tuple((m, mlists[m][head[m]]) for m in cycle)
        t = len(rotations)
        rotations.append(rho)
        arcs: set[int] = set()

        # type 1: the rotation that produced each current pair
        for m, w in rho:
            src = producer.get((m, w))
            if src is not None:
                arcs.add(src)

        # eliminate: each w_i keeps only men at least as good as m_{i-1}
        size = len(rho)
        for i in range(size):
            m_i, w_i = rho[i]
            m_prev = rho[(i - 1) % size][0]
            keep = wranks[w_i][m_prev]
            for m2 in wlists[w_i]:
                if wranks[w_i][m2] > keep and (m2, w_i) not in deleted:
                    deleted.add((m2, w_i))
                    eliminator[(m2, w_i)] = t
            holder[w_i] = m_prev
            producer[(m_prev, w_i)] = t

        # type 2: for each man the rotations that removed the women he
        # skips over while moving to his next partner
        for i in range(size):
            m_i, w_i = rho[i]
            w_next = rho[(i + 1) % size][1]
            passing = False
            for w in mlists[m_i]:
                if w == w_i:
                    passing = True
                    continue
                if w == w_next:
                    break
                if passing:
                    src = eliminator.get((m_i, w))
                    if src is not None and src != t:
                        arcs.add(src)
        preds.append(arcs)

        for m in cycle:
            advance(m)
        for i in range(size):
            m_i = rho[i][0]
            w_next = rho[(i + 1) % size][1]
            assert mlists[m_i][head[m_i]] == w_next, "elimination out of step"

    return RotationData(man_optimal, rotations, preds)


def apply_rotations(data: RotationData, subset) -> dict[AgentId, AgentId]:
    """Partner map for the stable matching of a closed rotation subset."""
    partner = dict(data.man_optimal)
    for t in sorted(subset):
        rho = data.rotations[t]
        size = len(rho)
        for i in range(size):
            partner[rho[i][0]] = rho[(i + 1) % size][1]
    return partner


def closed_subsets(preds: list[set[int]]):
    """Yield every predecessor-closed subset of rotations exactly once.

    Subsets come out in depth-first order with the empty set first and,
    when the full set is closed (it always is), the full set last.
    """
    n = len(preds)
    sel: list[int] = []
    selset: set[int] = set()

    def rec(i: int):
        if i == n:
            yield tuple(sel)
            return
        yield from rec(i + 1)
        if preds[i] <= selset:
            sel.append(i)
            selset.add(i)
            yield from rec(i + 1)
            sel.pop()
            selset.remove(i)

    yield from rec(0)


def _pred_masks(preds: list[set[int]]) -> list[int]:
    masks = [0] * len(preds)
    for t in range(len(preds)):
        m = 0
        for q in preds[t]:
            m |= masks[q] | (1 << q)
        masks[t] = m
    return masks


def _partner_matching(instance: Instance, partner: dict[AgentId, AgentId]) -> Matching:
    return make_matching(instance, list(partner.items()))


def _rank_vector_key(instance: Instance, partner: dict[AgentId, AgentId], men) -> tuple:
    big = 10 ** 9
    return tuple(
        instance.rank(m, partner[m]) if m in partner else big for m in men
    )


# ---------------------------------------------------------------------------
# optimal stable matchings for SM


def optimal_stable_sm(instance: Instance, objective: str) -> Matching:
    """Stable matching optimising a global criterion, for complete SM.

    Objectives: egalitarian (minimum total cost), min-regret (minimum
    worst rank over everyone), min-regret-M / min-regret-W (worst rank
    over one side only).
    """
    if objective not in SM_OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    _require_sm_shaped(instance)
    _require_tie_free(instance)
    _require_complete(instance)
    if objective == "min-regret-M":
        return gale_shapley(instance, "residents")
    if objective == "min-regret-W":
        return gale_shapley(instance, "hospitals")
    data = rotation_data(instance)
    if objective == "egalitarian":
        subset = _min_cost_closed_subset(instance, data)
        return _partner_matching(instance, apply_rotations(data, subset))
    return _min_regret_walk(instance, data)


def _rotation_cost_delta(instance: Instance, rho) -> int:
    size = len(rho)
    delta = 0
    for i in range(size):
        m_i, w_i = rho[i]
        w_next = rho[(i + 1) % size][1]
        m_prev = rho[(i - 1) % size][0]
        delta += instance.rank(m_i, w_next) - instance.rank(m_i, w_i)
        delta += instance.rank(w_i, m_prev) - instance.rank(w_i, m_i)
    return delta


def _min_cost_closed_subset(instance: Instance, data: RotationData) -> tuple:
    """Closed subset minimising total cost, via a min-cut closure."""
    n = len(data.rotations)
    if n == 0:
        return ()
    profit = [-_rotation_cost_delta(instance, rho) for rho in data.rotations]
    inf = sum(abs(p) for p in profit) + 1
    net = FlowNetwork(n + 2)
    source, sink = n, n + 1
    for t in range(n):
        if profit[t] > 0:
            net.add_edge(source, t, profit[t])
        elif profit[t] < 0:
            net.add_edge(t, sink, -profit[t])
        for q in data.preds[t]:
            net.add_edge(t, q, inf)
    net.run(source, sink)
    chosen = net.reachable_from(source)
    return tuple(t for t in range(n) if t in chosen)


def _min_regret_walk(instance: Instance, data: RotationData) -> Matching:
    """Minimum regret stable matching by walking forced eliminations.

    Men only get worse and women only get better as rotations are
    applied, so while the regret is determined by a woman the only way
    to beat it runs through her next rotation and its predecessors.
    """
    men = _by_index(data.man_optimal)
    by_woman: dict[AgentId, list[int]] = {}
    for t, rho in enumerate(data.rotations):
        for _, w in rho:
            by_woman.setdefault(w, []).append(t)
    masks = _pred_masks(data.preds)

    partner = dict(data.man_optimal)
    applied = 0

    def regrets() -> tuple[int, int, Optional[AgentId]]:
        man_r = 0
        woman_r = 0
        worst_w = None
        for m, w in partner.items():
            man_r = max(man_r, instance.rank(m, w))
            r = instance.rank(w, m)
            if r > woman_r or (r == woman_r and worst_w is None):
                woman_r = r
                worst_w = w
            elif r == woman_r and w.index < worst_w.index:
                worst_w = w
        return man_r, woman_r, worst_w

    best = dict(partner)
    man_r, woman_r, worst_w = regrets()
    best_val = max(man_r, woman_r)
    for _ in range(len(data.rotations) + 1):
        if woman_r <= man_r or worst_w is None:
            break
        nxt = None
        for t in by_woman.get(worst_w, ()):
            if not (applied >> t) & 1:
                nxt = t
                break
        if nxt is None:
            break
        need = (masks[nxt] | (1 << nxt)) & ~applied
        subset = [t for t in range(len(data.rotations)) if (need >> t) & 1]
        for t in subset:
            rho = data.rotations[t]
            size = len(rho)
            for i in range(size):
                partner[rho[i][0]] = rho[(i + 1) % size][1]
        applied |= need
        man_r, woman_r, worst_w = regrets()
        if max(man_r, woman_r) < best_val:
            best_val = max(man_r, woman_r)
            best = dict(partner)
    return _partner_matching(instance, best)


def all_stable_pairs_sm(instance: Instance) -> frozenset:
    """Every (resident, hospital) pair present in some stable matching."""
    _require_sm_shaped(instance)
    _require_tie_free(instance)
    _require_complete(instance)
    data = rotation_data(instance)
    pairs = set(data.man_optimal.items())
    for rho in data.rotations:
        size = len(rho)
        for i in range(size):
            pairs.add((rho[i][0], rho[(i + 1) % size][1]))
    return frozenset(pairs)


# ---------------------------------------------------------------------------
# enumeration of all stable matchings


def enumerate_stable(
    instance: Instance,
    method: str = "rotation-elimination",
    cap: Optional[int] = None,
) -> tuple[list[Matching], bool]:
    """All stable matchings of a tie-free SM-shaped instance.

    Both methods produce the same set.  Output is sorted by the vector
    of men's partner ranks, which puts the resident-optimal matching
    first and the hospital-optimal one last.  With `cap` at most cap
    matchings are returned and the flag reports truncation; a truncated
    listing still starts at the resident-optimal matching but is only
    sorted within what was explored.
    """
    if method not in ENUM_METHODS:
        raise ValueError(f"unknown enumeration method {method!r}")
    _require_sm_shaped(instance)
    _require_tie_free(instance)
    limit = None if cap is None else max(cap, 0) + 1
    men = _by_index(instance.agents(Role.RESIDENT))
    if method == "rotation-elimination":
        data = rotation_data(instance)
        partners = []
        for subset in closed_subsets(data.preds):
            partners.append(apply_rotations(data, subset))
            if limit is not None and len(partners) >= limit:
                break
    else:
        partners = _break_marriage_all(instance, limit)
    truncated = limit is not None and len(partners) >= limit
    if truncated:
        partners = partners[: limit - 1]
    partners.sort(key=lambda p: _rank_vector_key(instance, p, men))
    return [_partner_matching(instance, p) for p in partners], truncated


def _break_marriage_all(
    instance: Instance, limit: Optional[int]
) -> list[dict[AgentId, AgentId]]:
    """Enumerate stable matchings by successive marriage breaking.

    From each known stable matching, break one pair and let the freed
    resident propose onward; the broken hospital only accepts a strictly
    better offer.  Reaching such an offer yields a new stable matching,
    and recursing with non-decreasing break positions covers the lattice.
    """
    men = _by_index(instance.agents(Role.RESIDENT))
    lists = {m: _strict(instance, m) for m in men}
    position = {
        m: {w: i for i, w in enumerate(lists[m])} for m in men
    }
    base = _deferred_acceptance(instance, Role.RESIDENT)
    partner0 = {m: next(iter(ws)) for m, ws in base.items() if ws}

    found: list[dict[AgentId, AgentId]] = [partner0]
    seen = {tuple(sorted(((m.index, w.index) for m, w in partner0.items())))}

    def attempt(partner: dict[AgentId, AgentId], broken: AgentId):
        new = dict(partner)
        of_w = {w: m for m, w in new.items()}
        target = new[broken]
        floor = instance.rank(target, broken)
        ptr = {m: position[m][w] + 1 for m, w in new.items()}
        del new[broken]
        queue = deque([broken])
        while queue:
            m = queue.popleft()
            while True:
                i = ptr.get(m, 0)
                if i >= len(lists[m]):
                    return None
                w = lists[m][i]
                ptr[m] = i + 1
                if w == target:
                    if instance.rank(w, m) < floor:
                        new[m] = w
                        of_w[w] = m
                        return new
                    continue
                cur = of_w.get(w)
                if cur is None:
                    # w is unmatched in every stable matching, so any
                    # completion that leaves m at or below w is blocked
                    return None
                if instance.rank(w, m) < instance.rank(w, cur):
                    new[m] = w
                    of_w[w] = m
                    del new[cur]
                    queue.append(cur)
                    break
        return None

    def rec(partner: dict[AgentId, AgentId], start: int) -> bool:
        for i in range(start, len(men)):
            m = men[i]
            if m not in partner:
                continue
            new = attempt(partner, m)
            if new is None:
                continue
            key = tuple(sorted((a.index, b.index) for a, b in new.items()))
            if key in seen:
                continue
            seen.add(key)
            found.append(new)
            if limit is not None and len(found) >= limit:
                return False
            if not rec(new, i):
                return False
        return True

    rec(partner0, 0)
    return found


# ---------------------------------------------------------------------------
# super-stability


def super_stable(instance: Instance) -> Optional[Matching]:
    """A super-stable matching, or None when no matching avoids even
    indifferent blocking pairs.

    Resident-proposing with whole-tie proposals: a resident courts every
    hospital in its current head tie group, and an over-subscribed
    hospital rejects its entire worst tie.  The certified outcome is
    authoritative either way.
    """
    _require_two_sided(instance)
    candidate = _super_attempt(instance)
    if candidate is not None:
        m = make_matching(instance, candidate)
        if is_stable(instance, m, StabilityCriterion.SUPER):
            return m
    return None


def _super_attempt(instance: Instance):
    residents = _by_index(instance.agents(Role.RESIDENT))
    groups = {r: [list(g) for g in instance.pref(r)] for r in residents}
    deleted: set[tuple[AgentId, AgentId]] = set()
    engaged: dict[AgentId, set[AgentId]] = {r: set() for r in residents}
    assignees: dict[AgentId, set[AgentId]] = {
        h: set() for h in instance.agents(Role.HOSPITAL)
    }
    hlist = {h: _by_index(x for g in instance.pref(h) for x in g) for h in assignees}

    def remove(r: AgentId, h: AgentId) -> None:
        deleted.add((r, h))
        if h in engaged[r]:
            engaged[r].discard(h)
            assignees[h].discard(r)
            if not engaged[r]:
                queue.append(r)

    def head_group(r: AgentId) -> list[AgentId]:
        for g in groups[r]:
            live = [h for h in g if (r, h) not in deleted]
            if live:
                return live
        return []

    queue = deque(residents)
    while queue:
        r = queue.popleft()
        if engaged[r]:
            continue
        head = head_group(r)
        if not head:
            continue
        for h in head:
            if (r, h) in deleted or h in engaged[r]:
                continue
            engaged[r].add(h)
            assignees[h].add(r)
            cap = instance.capacity(h)
            while len(assignees[h]) > cap:
                worst = max(instance.rank(h, x) for x in assignees[h])
                for x in [x for x in assignees[h] if instance.rank(h, x) == worst]:
                    remove(x, h)
            if len(assignees[h]) == cap:
                worst = max(instance.rank(h, x) for x in assignees[h])
                for x in hlist[h]:
                    if instance.rank(h, x) > worst and (x, h) not in deleted:
                        remove(x, h)

    pairs = []
    for r in residents:
        if len(engaged[r]) > 1:
            return None
        for h in engaged[r]:
            pairs.append((r, h))
    return pairs


# ---------------------------------------------------------------------------
# strong stability


def strongly_stable(instance: Instance) -> Optional[Matching]:
    """A strongly stable matching of an SM-shaped instance, or None.

    Proposal rounds with strictly-worse deletions build an engagement
    graph; while some set of residents cannot all be matched inside it,
    the hospitals they crowd drop their worst tie and the rounds resume.
    The certified outcome is authoritative.
    """
    _require_sm_shaped(instance)
    candidate = _strong_attempt(instance)
    if candidate is not None:
        m = make_matching(instance, candidate)
        if is_stable(instance, m, StabilityCriterion.STRONG):
            return m
    return None


def _strong_attempt(instance: Instance):
    men = _by_index(instance.agents(Role.RESIDENT))
    deleted: set[tuple[AgentId, AgentId]] = set()
    engaged: dict[AgentId, set[AgentId]] = {m: set() for m in men}
    suitors: dict[AgentId, set[AgentId]] = {
        w: set() for w in instance.agents(Role.HOSPITAL)
    }
    wlist = {w: _by_index(x for g in instance.pref(w) for x in g) for w in suitors}

    def remove(m: AgentId, w: AgentId) -> None:
        deleted.add((m, w))
        engaged[m].discard(w)
        suitors[w].discard(m)

    def proposal_rounds() -> None:
        queue = deque(men)
        while queue:
            m = queue.popleft()
            if engaged[m]:
                continue
            head: list[AgentId] = []
            for g in instance.pref(m):
                head = [w for w in g if (m, w) not in deleted]
                if head:
                    break
            for w in head:
                engaged[m].add(w)
                suitors[w].add(m)
                keep = instance.rank(w, m)
                for x in wlist[w]:
                    if instance.rank(w, x) > keep and (x, w) not in deleted:
                        was = x in suitors[w]
                        remove(x, w)
                        if was and not engaged[x]:
                            queue.append(x)

    while True:
        proposal_rounds()
        match_m, match_w = _max_bipartite(engaged)
        exposed = [m for m in men if engaged[m] and m not in match_m]
        if not exposed:
            return list(match_m.items())
        # critical set: men reachable from exposed men along alternating paths
        critical: set[AgentId] = set()
        frontier = list(exposed)
        crowded: set[AgentId] = set()
        while frontier:
            m = frontier.pop()
            if m in critical:
                continue
            critical.add(m)
            for w in engaged[m]:
                if w in crowded:
                    continue
                crowded.add(w)
                nxt = match_w.get(w)
                if nxt is not None and nxt not in critical:
                    frontier.append(nxt)
        progress = False
        for w in crowded:
            live = [x for x in wlist[w] if (x, w) not in deleted]
            if not live:
                continue
            tail = max(instance.rank(w, x) for x in live)
            for x in live:
                if instance.rank(w, x) == tail:
                    remove(x, w)
                    progress = True
        if not progress:
            return None


def _max_bipartite(engaged: dict[AgentId, set[AgentId]]):
    """Maximum matching of the engagement graph, as both partner maps."""
    match_w: dict[AgentId, AgentId] = {}
    match_m: dict[AgentId, AgentId] = {}

    def augment(m: AgentId, seen: set[AgentId]) -> bool:
        for w in sorted(engaged[m], key=lambda a: a.index):
            if w in seen:
                continue
            seen.add(w)
            cur = match_w.get(w)
            if cur is None or augment(cur, seen):
                match_w[w] = m
                match_m[m] = w
                return True
        return False

    for m in sorted(engaged, key=lambda a: a.index):
        if engaged[m]:
            augment(m, set())
    return match_m, match_w


# ---------------------------------------------------------------------------
# approximation of maximum weakly stable matchings


def kiraly_approx(instance: Instance, tie_sides: str = "one-sided") -> Matching:
    """Weakly stable matching of at least 2/3 the maximum possible size.

    The one-sided variant requires strict resident lists and lets an
    unmatched resident retry its whole list once with promoted priority,
    which hospitals honour inside ties.  The two-sided variant also
    copes with resident-side ties: proposals inside a tie group target
    free hospitals first, and a hospital abandons an indifferent partner
    who has a free hospital of equal appeal to fall back on.
    """
    _require_two_sided(instance)
    if tie_sides not in TIE_SIDES:
        raise ValueError(f"unknown tie mode {tie_sides!r}")
    if tie_sides == "one-sided":
        if instance.has_ties(Role.RESIDENT):
            raise InapplicableError(
                "the one-sided variant requires strict resident lists"
            )
        pairs = _kiraly_one_sided(instance)
    else:
        pairs = _kiraly_two_sided(instance)
    m = make_matching(instance, pairs)
    if not is_stable(instance, m, StabilityCriterion.WEAK):
        raise MatchkitError("internal error: approximation lost stability")
    return m


def _kiraly_one_sided(instance: Instance):
    residents = _by_index(instance.agents(Role.RESIDENT))
    lists = {r: _strict(instance, r) for r in residents}
    promoted = {r: False for r in residents}
    ptr = {r: 0 for r in residents}
    held: dict[AgentId, set[AgentId]] = {
        h: set() for h in instance.agents(Role.HOSPITAL)
    }
    holder_of = {r: None for r in residents}

    def key(h: AgentId, r: AgentId) -> tuple:
        return (instance.rank(h, r), 0 if promoted[r] else 1, r.index)

    queue = deque(residents)
    while queue:
        r = queue.popleft()
        if holder_of[r] is not None:
            continue
        placed = False
        while ptr[r] < len(lists[r]):
            h = lists[r][ptr[r]]
            ptr[r] += 1
            if len(held[h]) < instance.capacity(h):
                held[h].add(r)
                holder_of[r] = h
                placed = True
                break
            worst = max(held[h], key=lambda x: key(h, x))
            if key(h, r) < key(h, worst):
                held[h].discard(worst)
                holder_of[worst] = None
                queue.append(worst)
                held[h].add(r)
                holder_of[r] = h
                placed = True
                break
        if not placed and not promoted[r]:
            promoted[r] = True
            ptr[r] = 0
            queue.append(r)
    return [(r, h) for h, rs in held.items() for r in rs]


def _kiraly_two_sided(instance: Instance):
    # hospitals are split into unit slots so capacities and hospital-side
    # ties reduce to the one-to-one case; a resident is indifferent
    # between the slots of one hospital
    residents = _by_index(instance.agents(Role.RESIDENT))
    slots: list[AgentId] = []
    slot_ids: dict[AgentId, list[int]] = {}
    for h in _by_index(instance.agents(Role.HOSPITAL)):
        slot_ids[h] = []
        for _ in range(instance.capacity(h)):
            slot_ids[h].append(len(slots))
            slots.append(h)
    groups = {
        r: [
            [s for h in g for s in slot_ids[h]]
            for g in instance.pref(r)
        ]
        for r in residents
    }
    srank = [
        {r: instance.rank(slots[s], r) for g in instance.pref(slots[s]) for r in g}
        for s in range(len(slots))
    ]

    level = {r: 0 for r in residents}
    gi = {r: 0 for r in residents}
    refused: dict[AgentId, set[int]] = {r: set() for r in residents}
    partner_of: list[Optional[AgentId]] = [None] * len(slots)
    slot_of: dict[AgentId, Optional[int]] = {r: None for r in residents}

    def uncertain(r: AgentId) -> bool:
        s = slot_of[r]
        if s is None:
            return False
        return any(
            partner_of[x] is None and x != s for x in groups[r][gi[r]]
        )

    def prefers(s: int, new: AgentId, cur: AgentId) -> bool:
        r1, r2 = srank[s][new], srank[s][cur]
        if r1 != r2:
            return r1 < r2
        if level[new] != level[cur]:
            return level[new] > level[cur]
        return uncertain(cur) and not uncertain(new)

    queue = deque(residents)
    while queue:
        r = queue.popleft()
        if slot_of[r] is not None:
            continue
        while gi[r] < len(groups[r]):
            group = [s for s in groups[r][gi[r]] if s not in refused[r]]
            if not group:
                gi[r] += 1
                continue
            free = [s for s in group if partner_of[s] is None]
            target = free[0] if free else group[0]
            cur = partner_of[target]
            if cur is None:
                partner_of[target] = r
                slot_of[r] = target
                break
            if prefers(target, r, cur):
                partner_of[target] = r
                slot_of[r] = target
                slot_of[cur] = None
                refused[cur].add(target)
                queue.append(cur)
                break
            refused[r].add(target)
        else:
            if level[r] == 0:
                level[r] = 1
                gi[r] = 0
                refused[r].clear()
                queue.append(r)
    return [
        (r, slots[s]) for r, s in slot_of.items() if s is not None
    ]


# ---------------------------------------------------------------------------
# maximum popular matching for SM with incomplete lists


def max_popular_smi(instance: Instance) -> Matching:
    """Maximum cardinality popular matching for tie-free SM instances.

    Two-level deferred acceptance: a resident who runs out of options
    retries the whole list at raised priority, and hospitals always
    prefer raised residents over ordinary ones before comparing ranks.
    """
    _require_sm_shaped(instance)
    _require_tie_free(instance)
    residents = _by_index(instance.agents(Role.RESIDENT))
    lists = {r: _strict(instance, r) for r in residents}
    level = {r: 0 for r in residents}
    ptr = {r: 0 for r in residents}
    holder: dict[AgentId, Optional[AgentId]] = {
        h: None for h in instance.agents(Role.HOSPITAL)
    }
    place: dict[AgentId, Optional[AgentId]] = {r: None for r in residents}

    def key(h: AgentId, r: AgentId) -> tuple:
        return (-level[r], instance.rank(h, r))

    queue = deque(residents)
    while queue:
        r = queue.popleft()
        if place[r] is not None:
            continue
        placed = False
        while ptr[r] < len(lists[r]):
            h = lists[r][ptr[r]]
            ptr[r] += 1
            cur = holder[h]
            if cur is None or key(h, r) < key(h, cur):
                holder[h] = r
                place[r] = h
                if cur is not None:
                    place[cur] = None
                    queue.append(cur)
                placed = True
                break
        if not placed and level[r] == 0:
            level[r] = 1
            ptr[r] = 0
            queue.append(r)
    return make_matching(
        instance, [(r, h) for r, h in place.items() if h is not None]
    )
