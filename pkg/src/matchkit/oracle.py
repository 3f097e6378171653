"""Exhaustive reference answers for small instances.

Everything here enumerates the full matching space and answers questions
by brute force: stability by definition check, optimality and popularity
by comparison against every matching.  Solvers are tested against these
answers; no solver calls into this module except where a result is
explicitly defined as "best over all matchings" and the instance is
within budget.

Matchings travel as int32 rows (one entry per left agent / roommate,
holding the partner id or -1) between the kernels and the scoring
helpers; conversion to `Matching` objects happens only at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import BudgetError, InapplicableError
from .metrics import compute_stats
from .model import (
    AgentId,
    Instance,
    Matching,
    ProblemClass,
    Role,
    StabilityCriterion,
    make_matching,
)

_CRIT = {
    StabilityCriterion.WEAK: K.WEAK,
    StabilityCriterion.STRONG: K.STRONG,
    StabilityCriterion.SUPER: K.SUPER,
}

_ONE_SIDED = (ProblemClass.HA, ProblemClass.CHA, ProblemClass.SPA)

UNRANKED = K.UNRANKED


@dataclass(frozen=True)
class Budget:
    """Hard limits for exhaustive work; exceeding either raises BudgetError."""

    max_agents: int = 10
    max_matchings: int = 2_000_000
    max_pairwise: int = 30_000  # k*k popularity scans


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class _Enc:
    """Kernel-level picture of an instance."""

    kind: str  # "bip" or "sr"
    left: tuple[AgentId, ...]
    right: tuple[AgentId, ...]
    adj_idx: np.ndarray
    adj: np.ndarray
    right_cap: np.ndarray
    group: np.ndarray
    group_cap: np.ndarray
    rankL: np.ndarray
    rankR: Optional[np.ndarray]
    lec_rank: Optional[np.ndarray]
    lecturers: tuple[AgentId, ...]


def _check_agents(instance: Instance, budget: Budget) -> None:
    for role, n in instance.counts.items():
        if n > budget.max_agents:
            raise BudgetError(
                f"{n} {role.value}s exceed the oracle budget of {budget.max_agents}"
            )


def encode(instance: Instance) -> _Enc:
    pc = instance.problem_class
    if pc is ProblemClass.SR:
        agents = tuple(instance.agents(Role.ROOMMATE))
        n = len(agents)
        rank = np.full((n, n), -1, dtype=np.int32)
        for i, a in enumerate(agents):
            for j, b in enumerate(agents):
                r = instance.rank(a, b)
                if r is not None:
                    rank[i, j] = r
        adj_lists = [
            [j for j in range(n) if rank[i, j] >= 0 and rank[j, i] >= 0]
            for i in range(n)
        ]
        adj_idx, adj = _csr(adj_lists)
        empty = np.zeros(0, dtype=np.int32)
        return _Enc(
            "sr", agents, agents, adj_idx, adj,
            np.ones(n, dtype=np.int32), np.full(n, -1, dtype=np.int32), empty,
            rank, rank, None, (),
        )

    left_role, right_role = {
        ProblemClass.SM: (Role.RESIDENT, Role.HOSPITAL),
        ProblemClass.HR: (Role.RESIDENT, Role.HOSPITAL),
        ProblemClass.HA: (Role.APPLICANT, Role.HOUSE),
        ProblemClass.CHA: (Role.APPLICANT, Role.HOUSE),
        ProblemClass.SPA: (Role.STUDENT, Role.PROJECT),
        ProblemClass.SPAS: (Role.STUDENT, Role.PROJECT),
    }[pc]
    left = tuple(instance.agents(left_role))
    right = tuple(instance.agents(right_role))
    li = {a: i for i, a in enumerate(left)}
    ri = {a: i for i, a in enumerate(right)}
    nL, nR = len(left), len(right)
    rankL = np.full((nL, nR), -1, dtype=np.int32)
    for a in left:
        for b in right:
            r = instance.rank(a, b)
            if r is not None:
                rankL[li[a], ri[b]] = r
    rankR = None
    if pc in (ProblemClass.SM, ProblemClass.HR):
        rankR = np.full((nR, nL), -1, dtype=np.int32)
        for b in right:
            for a in left:
                r = instance.rank(b, a)
                if r is not None:
                    rankR[ri[b], li[a]] = r
    adj_lists: list[list[int]] = [[] for _ in range(nL)]
    for a, b in instance.acceptable_pairs():
        adj_lists[li[a]].append(ri[b])
    adj_idx, adj = _csr(adj_lists)
    right_cap = np.array([instance.capacity(b) for b in right], dtype=np.int32)

    group = np.full(nR, -1, dtype=np.int32)
    group_cap = np.zeros(0, dtype=np.int32)
    lec_rank = None
    lecturers: tuple[AgentId, ...] = ()
    if pc in (ProblemClass.SPA, ProblemClass.SPAS):
        lecturers = tuple(instance.agents(Role.LECTURER))
        gi = {a: i for i, a in enumerate(lecturers)}
        for b in right:
            group[ri[b]] = gi[instance.owner(b)]
        group_cap = np.array(
            [instance.capacity(g) for g in lecturers], dtype=np.int32
        )
        if pc is ProblemClass.SPAS:
            lec_rank = np.full((len(lecturers), nL), -1, dtype=np.int32)
            for g in lecturers:
                for a in left:
                    r = instance.rank(g, a)
                    if r is not None:
                        lec_rank[gi[g], li[a]] = r
    return _Enc(
        "bip", left, right, adj_idx, adj, right_cap, group, group_cap,
        rankL, rankR, lec_rank, lecturers,
    )


def _csr(adj_lists: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    idx = np.zeros(len(adj_lists) + 1, dtype=np.int32)
    for i, lst in enumerate(adj_lists):
        idx[i + 1] = idx[i] + len(lst)
    flat = np.array(
        [x for lst in adj_lists for x in lst], dtype=np.int32
    )
    return idx, flat


def matchings_array(
    instance: Instance, budget: Budget = DEFAULT_BUDGET
) -> tuple[np.ndarray, _Enc]:
    """Every matching of the instance as an int32 matrix."""
    _check_agents(instance, budget)
    enc = encode(instance)
    if enc.kind == "sr":
        complete, mats = K.enum_sr(
            len(enc.left), enc.adj_idx, enc.adj, budget.max_matchings
        )
    else:
        complete, mats = K.enum_bipartite(
            len(enc.left), len(enc.right), enc.adj_idx, enc.adj,
            enc.right_cap, enc.group, enc.group_cap, budget.max_matchings,
        )
    if not complete:
        raise BudgetError(
            f"more than {budget.max_matchings} matchings; instance too large"
        )
    return mats, enc


def row_to_matching(instance: Instance, enc: _Enc, row: np.ndarray) -> Matching:
    pairs = []
    for i, a in enumerate(enc.left):
        r = int(row[i])
        if r >= 0:
            if enc.kind == "sr":
                if i < r:
                    pairs.append((a, enc.right[r]))
            else:
                pairs.append((a, enc.right[r]))
    return make_matching(instance, pairs)


def matching_to_row(matching: Matching, enc: _Enc) -> np.ndarray:
    idx_l = {a: i for i, a in enumerate(enc.left)}
    idx_r = {b: i for i, b in enumerate(enc.right)}
    row = np.full(len(enc.left), -1, dtype=np.int32)
    for a, b in matching.pairs:
        if enc.kind == "sr":
            row[idx_l[a]] = idx_r[b]
            row[idx_l[b]] = idx_r[a]
        else:
            row[idx_l[a]] = idx_r[b]
    return row


def enumerate_matchings(
    instance: Instance, budget: Budget = DEFAULT_BUDGET
) -> list[Matching]:
    mats, enc = matchings_array(instance, budget)
    return [row_to_matching(instance, enc, mats[i]) for i in range(mats.shape[0])]


def count_matchings(instance: Instance, budget: Budget = DEFAULT_BUDGET) -> int:
    mats, _ = matchings_array(instance, budget)
    return int(mats.shape[0])


def stable_mask(
    instance: Instance,
    mats: np.ndarray,
    enc: _Enc,
    criterion: StabilityCriterion = StabilityCriterion.WEAK,
) -> np.ndarray:
    pc = instance.problem_class
    crit = _CRIT[criterion]
    if pc is ProblemClass.SR:
        return K.stable_mask_sr(mats, enc.adj_idx, enc.adj, enc.rankL, crit)
    if pc is ProblemClass.SPAS:
        return K.stable_mask_spas(
            mats, enc.adj_idx, enc.adj, enc.rankL, enc.right_cap,
            enc.group, enc.group_cap, enc.lec_rank, crit,
        )
    if pc in (ProblemClass.SM, ProblemClass.HR):
        return K.stable_mask_bipartite(
            mats, enc.adj_idx, enc.adj, enc.rankL, enc.rankR,
            enc.right_cap, crit,
        )
    raise InapplicableError(f"stability is not defined for {pc.value}")


def stable_matchings(
    instance: Instance,
    criterion: StabilityCriterion = StabilityCriterion.WEAK,
    budget: Budget = DEFAULT_BUDGET,
) -> list[Matching]:
    mats, enc = matchings_array(instance, budget)
    mask = stable_mask(instance, mats, enc, criterion)
    return [
        row_to_matching(instance, enc, mats[i])
        for i in np.nonzero(mask)[0]
    ]


def count_stable(
    instance: Instance,
    criterion: StabilityCriterion = StabilityCriterion.WEAK,
    budget: Budget = DEFAULT_BUDGET,
) -> int:
    mats, enc = matchings_array(instance, budget)
    return int(stable_mask(instance, mats, enc, criterion).sum())


# ---------------------------------------------------------------------------
# scoring helpers over row matrices


def rank_rows(mats: np.ndarray, rankL: np.ndarray) -> np.ndarray:
    """ranks[m, l] = rank of l's assignment in matching m, UNRANKED if none."""
    k, nL = mats.shape
    out = np.full((k, nL), UNRANKED, dtype=np.int64)
    for l in range(nL):
        col = mats[:, l]
        hit = col >= 0
        if hit.any():
            out[hit, l] = rankL[l, col[hit]]
    return out


def right_rank_rows(mats: np.ndarray, rankR: np.ndarray) -> np.ndarray:
    """Right-side view of rank_rows; requires unit right capacities."""
    k, nL = mats.shape
    nR = rankR.shape[0]
    out = np.full((k, nR), UNRANKED, dtype=np.int64)
    rows = np.arange(k)
    for l in range(nL):
        col = mats[:, l]
        hit = col >= 0
        out[rows[hit], col[hit]] = rankR[col[hit], l]
    return out


def _sizes(mats: np.ndarray) -> np.ndarray:
    return (mats >= 0).sum(axis=1)


def _vote_ranks(instance: Instance, mats: np.ndarray, enc: _Enc) -> np.ndarray:
    """Per-voter assignment ranks: left always; right too when two-sided."""
    pc = instance.problem_class
    parts = [rank_rows(mats, enc.rankL)]
    if pc in (ProblemClass.SM, ProblemClass.HR):
        if not all(int(c) == 1 for c in enc.right_cap):
            raise InapplicableError(
                "popularity scans need unit capacities on both sides"
            )
        parts.append(right_rank_rows(mats, enc.rankR))
    elif pc not in _ONE_SIDED:
        raise InapplicableError(
            f"popularity is not supported for {pc.value}"
        )
    return np.hstack(parts)


def popularity_margin(
    instance: Instance, matching: Matching, budget: Budget = DEFAULT_BUDGET
) -> int:
    """Best vote margin any rival achieves against `matching` (<=0: popular)."""
    mats, enc = matchings_array(instance, budget)
    votes = _vote_ranks(instance, mats, enc)
    cand = _vote_ranks(
        instance, matching_to_row(matching, enc).reshape(1, -1), enc
    )[0]
    margins = (votes < cand).sum(axis=1) - (votes > cand).sum(axis=1)
    return int(margins.max())


def is_popular(
    instance: Instance, matching: Matching, budget: Budget = DEFAULT_BUDGET
) -> bool:
    return popularity_margin(instance, matching, budget) <= 0


def popular_rows(
    instance: Instance, budget: Budget = DEFAULT_BUDGET
) -> tuple[np.ndarray, np.ndarray, _Enc]:
    """(mats, popular mask, enc); quadratic scan guarded by the budget."""
    mats, enc = matchings_array(instance, budget)
    k = mats.shape[0]
    if k > budget.max_pairwise:
        raise BudgetError(
            f"{k} matchings exceed the pairwise-scan budget of {budget.max_pairwise}"
        )
    votes = _vote_ranks(instance, mats, enc)
    mask = np.ones(k, dtype=np.uint8)
    for i in range(k):
        margins = (votes < votes[i]).sum(axis=1) - (votes > votes[i]).sum(axis=1)
        if margins.max(initial=0) > 0:
            mask[i] = 0
    return mats, mask, enc


def popular_matchings(
    instance: Instance, budget: Budget = DEFAULT_BUDGET
) -> list[Matching]:
    mats, mask, enc = popular_rows(instance, budget)
    return [
        row_to_matching(instance, enc, mats[i]) for i in np.nonzero(mask)[0]
    ]


def more_popular(instance: Instance, a: Matching, b: Matching) -> int:
    """1 if a wins the head-to-head vote, -1 if b does, 0 on a tie.

    Every agent with a preference list votes.  A unit-capacity agent
    compares assignment ranks; a capacitated agent compares its sorted
    rank multiset lexicographically, padded to capacity.
    """
    votes_a = votes_b = 0
    for role in instance.roles:
        for agent in instance.agents(role):
            if not instance.has_prefs(agent):
                continue
            va = _vote_key(instance, a, agent)
            vb = _vote_key(instance, b, agent)
            if va < vb:
                votes_a += 1
            elif vb < va:
                votes_b += 1
    if votes_a > votes_b:
        return 1
    if votes_b > votes_a:
        return -1
    return 0


def _vote_key(instance: Instance, m: Matching, agent: AgentId) -> tuple:
    cap = instance.capacity(agent)
    ranks = sorted(
        instance.rank(agent, other) for other in m.assignees(agent)
        if instance.rank(agent, other) is not None
    )
    ranks += [UNRANKED] * (cap - len(ranks))
    return tuple(ranks)


def pareto_dominators(
    instance: Instance, matching: Matching, budget: Budget = DEFAULT_BUDGET
) -> int:
    """How many matchings leave every left agent at least as happy and
    someone strictly happier."""
    mats, enc = matchings_array(instance, budget)
    ranks = rank_rows(mats, enc.rankL)
    cand = rank_rows(matching_to_row(matching, enc).reshape(1, -1), enc.rankL)[0]
    dom = (ranks <= cand).all(axis=1) & (ranks < cand).any(axis=1)
    return int(dom.sum())


def is_pareto_optimal(
    instance: Instance, matching: Matching, budget: Budget = DEFAULT_BUDGET
) -> bool:
    return pareto_dominators(instance, matching, budget) == 0


# ---------------------------------------------------------------------------
# optima

_PROFILE_MODES = {
    "min-cost": 1,
    "rank-maximal": 0,
    "greedy": 2,
    "generous": 3,
    "greedy-generous": 4,
}

_STABLE_OBJECTIVES = (
    "max-stable",
    "egalitarian-stable",
    "min-regret-stable",
    "min-left-regret-stable",
    "min-right-regret-stable",
)


def oracle_optimum(
    instance: Instance,
    objective: str,
    criterion: StabilityCriterion = StabilityCriterion.WEAK,
    budget: Budget = DEFAULT_BUDGET,
):
    """(witness, value) best over every matching, or (None, None).

    Profile objectives score left-side preferences only; stable
    objectives score every preference-bearing group via the shared
    metrics and restrict to the stable set under `criterion`.
    """
    mats, enc = matchings_array(instance, budget)
    if objective == "max-size":
        sizes = _sizes(mats)
        i = int(sizes.argmax())
        return row_to_matching(instance, enc, mats[i]), int(sizes[i])
    if objective in _PROFILE_MODES:
        R = int(enc.rankL.max(initial=-1)) + 1
        i = K.best_profile_index(mats, enc.rankL, max(R, 1), _PROFILE_MODES[objective])
        if i < 0:
            return None, None
        witness = row_to_matching(instance, enc, mats[i])
        stats = compute_stats(instance, witness)
        if objective == "min-cost":
            value = (witness.size, stats.total_cost)
        else:
            role = enc.left[0].role if enc.left else None
            prof = stats.groups[role].profile if role in stats.groups else ()
            value = (witness.size, prof)
        return witness, value
    if objective == "max-popular":
        mats_p, mask, enc_p = popular_rows(instance, budget)
        idx = np.nonzero(mask)[0]
        if len(idx) == 0:
            return None, None
        sizes = _sizes(mats_p[idx])
        best = idx[int(sizes.argmax())]
        w = row_to_matching(instance, enc_p, mats_p[best])
        return w, int(sizes.max())
    if objective in _STABLE_OBJECTIVES:
        mask = stable_mask(instance, mats, enc, criterion)
        idx = np.nonzero(mask)[0]
        if len(idx) == 0:
            return None, None
        best_val = None
        best_row = None
        for i in idx:
            m = row_to_matching(instance, enc, mats[i])
            stats = compute_stats(instance, m)
            if objective == "max-stable":
                val = -m.size
            elif objective == "egalitarian-stable":
                val = stats.total_cost
            elif objective == "min-regret-stable":
                val = stats.total_regret
            elif objective == "min-left-regret-stable":
                val = _group_regret(stats, enc.left[0].role)
            else:
                val = _group_regret(stats, enc.right[0].role)
            if best_val is None or val < best_val:
                best_val = val
                best_row = i
        witness = row_to_matching(instance, enc, mats[best_row])
        value = -best_val if objective == "max-stable" else best_val
        return witness, value
    raise ValueError(f"unknown objective {objective!r}")


def _group_regret(stats, role: Role) -> int:
    g = stats.groups.get(role)
    return g.regret if g is not None else 0
