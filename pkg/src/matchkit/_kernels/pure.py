"""Pure Python kernels: exhaustive enumeration and stability masks.

Reference implementation of the hot loops.  The compiled extension
`_ckern` exports the same functions with identical semantics; parity is
covered by tests.  All matchings are encoded as int32 rows of length nL
holding the assigned right-side id (0-based) or -1.

Ranks here are 0-based tie-group indices; -1 marks an unacceptable pair.
UNRANKED stands in for "unmatched" when comparing (worse than any rank).
"""

from __future__ import annotations

import numpy as np

UNRANKED = 1 << 30

WEAK, STRONG, SUPER = 0, 1, 2


def enum_bipartite(nL, nR, adj_idx, adj, right_cap, group, group_cap, limit):
    """All capacity-respecting assignments over the acceptability lists.

    Returns (complete, matrix); `complete` is False when `limit` was hit,
    in which case the matrix holds the first `limit` matchings found.
    """
    caps = [int(c) for c in right_cap]
    gcaps = [int(c) for c in group_cap]
    grp = [int(g) for g in group]
    row = [-1] * nL
    out: list[list[int]] = []
    complete = True

    def rec(i):
        nonlocal complete
        if not complete:
            return
        if i == nL:
            if len(out) >= limit:
                complete = False
                return
            out.append(row.copy())
            return
        row[i] = -1
        rec(i + 1)
        for k in range(adj_idx[i], adj_idx[i + 1]):
            r = int(adj[k])
            if caps[r] <= 0:
                continue
            g = grp[r]
            if g >= 0 and gcaps[g] <= 0:
                continue
            caps[r] -= 1
            if g >= 0:
                gcaps[g] -= 1
            row[i] = r
            rec(i + 1)
            caps[r] += 1
            if g >= 0:
                gcaps[g] += 1
        row[i] = -1

    rec(0)
    mats = np.array(out, dtype=np.int32).reshape(len(out), nL)
    return complete, mats


def enum_sr(n, adj_idx, adj, limit):
    """All matchings of a roommates instance; rows hold partner ids or -1."""
    row = [-1] * n
    out: list[list[int]] = []
    complete = True

    def rec(i):
        nonlocal complete
        if not complete:
            return
        while i < n and row[i] != -1:
            i += 1
        if i == n:
            if len(out) >= limit:
                complete = False
                return
            out.append(row.copy())
            return
        rec(i + 1)  # i stays unmatched
        for k in range(adj_idx[i], adj_idx[i + 1]):
            j = int(adj[k])
            if j <= i or row[j] != -1:
                continue
            row[i] = j
            row[j] = i
            rec(i + 1)
            row[i] = -1
            row[j] = -1

    rec(0)
    mats = np.array(out, dtype=np.int32).reshape(len(out), n)
    return complete, mats


def _improves(rank_new, rank_worst, has_room, strict):
    if has_room:
        return True
    return rank_new < rank_worst if strict else rank_new <= rank_worst


def _blocks(l_new, l_worst, l_room, r_new, r_worst, r_room, criterion):
    if criterion == WEAK:
        return _improves(l_new, l_worst, l_room, True) and _improves(
            r_new, r_worst, r_room, True
        )
    if criterion == SUPER:
        return _improves(l_new, l_worst, l_room, False) and _improves(
            r_new, r_worst, r_room, False
        )
    return (
        _improves(l_new, l_worst, l_room, True)
        and _improves(r_new, r_worst, r_room, False)
    ) or (
        _improves(l_new, l_worst, l_room, False)
        and _improves(r_new, r_worst, r_room, True)
    )


def stable_mask_bipartite(mats, adj_idx, adj, rankL, rankR, right_cap, criterion):
    """1 where no acceptable pair blocks; two-sided lists, capacitated right."""
    k, nL = mats.shape
    nR = rankR.shape[0]
    mask = np.ones(k, dtype=np.uint8)
    for m in range(k):
        row = mats[m]
        load = [0] * nR
        worst = [-1] * nR
        for l in range(nL):
            r = row[l]
            if r >= 0:
                load[r] += 1
                rr = rankR[r, l]
                if rr > worst[r]:
                    worst[r] = rr
        ok = True
        for l in range(nL):
            cur = rankL[l, row[l]] if row[l] >= 0 else UNRANKED
            for t in range(adj_idx[l], adj_idx[l + 1]):
                r = int(adj[t])
                if r == row[l]:
                    continue
                if _blocks(
                    rankL[l, r],
                    cur,
                    False,
                    rankR[r, l],
                    worst[r] if load[r] else UNRANKED,
                    load[r] < right_cap[r],
                    criterion,
                ):
                    ok = False
                    break
            if not ok:
                break
        mask[m] = 1 if ok else 0
    return mask


def stable_mask_sr(mats, adj_idx, adj, rank, criterion):
    k, n = mats.shape
    mask = np.ones(k, dtype=np.uint8)
    for m in range(k):
        row = mats[m]
        ok = True
        for i in range(n):
            cur_i = rank[i, row[i]] if row[i] >= 0 else UNRANKED
            for t in range(adj_idx[i], adj_idx[i + 1]):
                j = int(adj[t])
                if j <= i or j == row[i]:
                    continue
                cur_j = rank[j, row[j]] if row[j] >= 0 else UNRANKED
                if _blocks(
                    rank[i, j], cur_i, False, rank[j, i], cur_j, False, criterion
                ):
                    ok = False
                    break
            if not ok:
                break
        mask[m] = 1 if ok else 0
    return mask


def stable_mask_spas(
    mats, adj_idx, adj, rankL, proj_cap, proj_lec, lec_cap, lec_rank, criterion
):
    """Stability mask for student/project/lecturer instances.

    A pair (s,p) with lecturer l blocks when s (weakly/strictly) prefers p
    and one of: both p and l have room; p has room, l is full and either s
    is already with l or l (weakly/strictly) prefers s to its worst
    assignee; p is full and l prefers s to the worst student on p.
    """
    k, nL = mats.shape
    nP = len(proj_cap)
    nLec = len(lec_cap)
    mask = np.ones(k, dtype=np.uint8)
    for m in range(k):
        row = mats[m]
        p_load = [0] * nP
        l_load = [0] * nLec
        p_worst = [-1] * nP
        l_worst = [-1] * nLec
        for s in range(nL):
            p = row[s]
            if p < 0:
                continue
            lec = proj_lec[p]
            p_load[p] += 1
            l_load[lec] += 1
            r = lec_rank[lec, s]
            if r > p_worst[p]:
                p_worst[p] = r
            if r > l_worst[lec]:
                l_worst[lec] = r

        def spa_blocks(s, p, strict_s, strict_l):
            cur = row[s]
            if cur >= 0:
                if strict_s:
                    if rankL[s, p] >= rankL[s, cur]:
                        return False
                else:
                    if rankL[s, p] > rankL[s, cur]:
                        return False
            lec = proj_lec[p]
            p_under = p_load[p] < proj_cap[p]
            l_under = l_load[lec] < lec_cap[lec]
            if p_under and l_under:
                return True
            r = lec_rank[lec, s]
            if p_under:
                if cur >= 0 and proj_lec[cur] == lec:
                    return True
                w = l_worst[lec]
                return r < w if strict_l else r <= w
            w = p_worst[p]
            return r < w if strict_l else r <= w

        ok = True
        for s in range(nL):
            for t in range(adj_idx[s], adj_idx[s + 1]):
                p = int(adj[t])
                if p == row[s]:
                    continue
                if criterion == WEAK:
                    hit = spa_blocks(s, p, True, True)
                elif criterion == SUPER:
                    hit = spa_blocks(s, p, False, False)
                else:
                    hit = spa_blocks(s, p, True, False) or spa_blocks(
                        s, p, False, True
                    )
                if hit:
                    ok = False
                    break
            if not ok:
                break
        mask[m] = 1 if ok else 0
    return mask


def best_profile_index(mats, rankL, R, mode):
    """Index of the best matching under a profile objective.

    mode 0: rank-maximal (lexicographically greatest profile)
    mode 1: minimum cost among maximum cardinality
    mode 2: greedy (maximum cardinality, then lexicographically greatest)
    mode 3: generous (maximum cardinality, then reverse-lex least)
    mode 4: greedy-generous (greedy, ties broken by generous)
    Ties keep the earliest index.
    """
    k, nL = mats.shape
    if k == 0:
        return -1

    def profile(m):
        counts = [0] * R
        size = 0
        cost = 0
        for l in range(nL):
            r = mats[m, l]
            if r >= 0:
                rk = rankL[l, r]
                counts[rk] += 1
                size += 1
                cost += rk + 1
        return size, cost, counts

    def lex_greater(a, b):  # a lexicographically greater than b
        for x, y in zip(a, b):
            if x != y:
                return x > y
        return False

    def gen_better(a, b):  # fewer entries at the worst differing rank
        for x, y in zip(reversed(a), reversed(b)):
            if x != y:
                return x < y
        return False

    best = 0
    b_size, b_cost, b_prof = profile(0)
    for m in range(1, k):
        size, cost, prof = profile(m)
        if mode == 0:
            better = lex_greater(prof, b_prof)
        elif mode == 1:
            better = size > b_size or (size == b_size and cost < b_cost)
        elif mode == 3:
            better = size > b_size or (size == b_size and gen_better(prof, b_prof))
        else:
            # greedy; greedy-generous coincides because all greedy-optimal
            # matchings share one profile, leaving generous indifferent
            better = size > b_size or (size == b_size and lex_greater(prof, b_prof))
        if better:
            best = m
            b_size, b_cost, b_prof = size, cost, prof
    return best
