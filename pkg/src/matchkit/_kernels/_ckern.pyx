# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API and semantics as matchkit._kernels.pure.

Matchings are int32 rows (assigned right id or -1).  Ranks are 0-based
tie-group indices, -1 for unacceptable.  Enumeration is two-pass: count
(clamped at limit), then fill a preallocated matrix in identical order.
"""

import numpy as np

UNRANKED = 1 << 30
WEAK, STRONG, SUPER = 0, 1, 2

cdef int C_UNRANKED = 1 << 30
cdef int C_WEAK = 0
cdef int C_STRONG = 1
cdef int C_SUPER = 2


cdef long long _count_bip(int i, int nL, const int[:] adj_idx, const int[:] adj,
                          int[:] caps, int[:] gcaps, const int[:] grp,
                          long long cap):
    if i == nL:
        return 1
    cdef long long total = _count_bip(i + 1, nL, adj_idx, adj, caps, gcaps, grp, cap)
    if total > cap:
        return total
    cdef int k, r, g
    for k in range(adj_idx[i], adj_idx[i + 1]):
        r = adj[k]
        if caps[r] <= 0:
            continue
        g = grp[r]
        if g >= 0 and gcaps[g] <= 0:
            continue
        caps[r] -= 1
        if g >= 0:
            gcaps[g] -= 1
        total += _count_bip(i + 1, nL, adj_idx, adj, caps, gcaps, grp, cap)
        caps[r] += 1
        if g >= 0:
            gcaps[g] += 1
        if total > cap:
            return total
    return total


def enum_bipartite(nL, nR, adj_idx, adj, right_cap, group, group_cap, limit):
    cdef int c_nL = nL
    a_idx = np.ascontiguousarray(adj_idx, dtype=np.intc)
    a = np.ascontiguousarray(adj, dtype=np.intc)
    caps = np.array(right_cap, dtype=np.intc)
    gcaps = np.array(group_cap, dtype=np.intc)
    grp = np.ascontiguousarray(group, dtype=np.intc)
    cdef long long cap = limit
    cdef long long n = _count_bip(0, c_nL, a_idx, a, caps, gcaps, grp, cap)
    if n > cap:
        n = cap
        complete = False
    else:
        complete = True
    out = np.empty((n, c_nL), dtype=np.int32)
    row = np.empty(c_nL, dtype=np.intc)
    cdef long long pos = 0
    cdef int[:, :] out_mv = out
    _fill_bip_limited(0, c_nL, a_idx, a, caps, gcaps, grp, row, out_mv, &pos, n)
    return complete, out


cdef void _fill_bip_limited(int i, int nL, const int[:] adj_idx, const int[:] adj,
                            int[:] caps, int[:] gcaps, const int[:] grp,
                            int[:] row, int[:, :] out, long long* pos,
                            long long cap):
    cdef int k, r, g, l
    if pos[0] >= cap:
        return
    if i == nL:
        for l in range(nL):
            out[pos[0], l] = row[l]
        pos[0] += 1
        return
    row[i] = -1
    _fill_bip_limited(i + 1, nL, adj_idx, adj, caps, gcaps, grp, row, out, pos, cap)
    for k in range(adj_idx[i], adj_idx[i + 1]):
        r = adj[k]
        if caps[r] <= 0:
            continue
        g = grp[r]
        if g >= 0 and gcaps[g] <= 0:
            continue
        caps[r] -= 1
        if g >= 0:
            gcaps[g] -= 1
        row[i] = r
        _fill_bip_limited(i + 1, nL, adj_idx, adj, caps, gcaps, grp, row, out, pos, cap)
        caps[r] += 1
        if g >= 0:
            gcaps[g] += 1
    row[i] = -1


cdef long long _count_sr(int i, int n, const int[:] adj_idx, const int[:] adj,
                         int[:] row, long long cap):
    while i < n and row[i] != -1:
        i += 1
    if i == n:
        return 1
    cdef long long total = _count_sr(i + 1, n, adj_idx, adj, row, cap)
    if total > cap:
        return total
    cdef int k, j
    for k in range(adj_idx[i], adj_idx[i + 1]):
        j = adj[k]
        if j <= i or row[j] != -1:
            continue
        row[i] = j
        row[j] = i
        total += _count_sr(i + 1, n, adj_idx, adj, row, cap)
        row[i] = -1
        row[j] = -1
        if total > cap:
            return total
    return total


cdef void _fill_sr(int i, int n, const int[:] adj_idx, const int[:] adj,
                   int[:] row, int[:, :] out, long long* pos, long long cap):
    cdef int k, j, l
    if pos[0] >= cap:
        return
    while i < n and row[i] != -1:
        i += 1
    if i == n:
        for l in range(n):
            out[pos[0], l] = row[l]
        pos[0] += 1
        return
    _fill_sr(i + 1, n, adj_idx, adj, row, out, pos, cap)
    for k in range(adj_idx[i], adj_idx[i + 1]):
        j = adj[k]
        if j <= i or row[j] != -1:
            continue
        row[i] = j
        row[j] = i
        _fill_sr(i + 1, n, adj_idx, adj, row, out, pos, cap)
        row[i] = -1
        row[j] = -1


def enum_sr(n, adj_idx, adj, limit):
    cdef int c_n = n
    a_idx = np.ascontiguousarray(adj_idx, dtype=np.intc)
    a = np.ascontiguousarray(adj, dtype=np.intc)
    row = np.full(c_n, -1, dtype=np.intc)
    cdef long long cap = limit
    cdef long long total = _count_sr(0, c_n, a_idx, a, row, cap)
    complete = total <= cap
    if not complete:
        total = cap
    out = np.empty((total, c_n), dtype=np.int32)
    cdef int[:, :] out_mv = out
    cdef long long pos = 0
    if total > 0:
        _fill_sr(0, c_n, a_idx, a, row, out_mv, &pos, total)
    return complete, out


cdef inline bint _improves(int rank_new, int rank_worst, bint has_room, bint strict):
    if has_room:
        return True
    if strict:
        return rank_new < rank_worst
    return rank_new <= rank_worst


cdef inline bint _blocks(int l_new, int l_worst, bint l_room,
                         int r_new, int r_worst, bint r_room, int criterion):
    if criterion == C_WEAK:
        return _improves(l_new, l_worst, l_room, True) and \
            _improves(r_new, r_worst, r_room, True)
    if criterion == C_SUPER:
        return _improves(l_new, l_worst, l_room, False) and \
            _improves(r_new, r_worst, r_room, False)
    return (_improves(l_new, l_worst, l_room, True) and
            _improves(r_new, r_worst, r_room, False)) or \
           (_improves(l_new, l_worst, l_room, False) and
            _improves(r_new, r_worst, r_room, True))


def stable_mask_bipartite(mats, adj_idx, adj, rankL, rankR, right_cap, criterion):
    m_arr = np.ascontiguousarray(mats, dtype=np.int32)
    cdef const int[:, :] M = m_arr
    cdef const int[:] a_idx = np.ascontiguousarray(adj_idx, dtype=np.intc)
    cdef const int[:] a = np.ascontiguousarray(adj, dtype=np.intc)
    cdef const int[:, :] rL = np.ascontiguousarray(rankL, dtype=np.intc)
    cdef const int[:, :] rR = np.ascontiguousarray(rankR, dtype=np.intc)
    cdef const int[:] cap = np.ascontiguousarray(right_cap, dtype=np.intc)
    cdef int crit = criterion
    cdef long long k = M.shape[0]
    cdef int nL = M.shape[1]
    cdef int nR = rR.shape[0]
    mask = np.ones(k, dtype=np.uint8)
    cdef unsigned char[:] mk = mask
    load_a = np.empty(nR, dtype=np.intc)
    worst_a = np.empty(nR, dtype=np.intc)
    cdef int[:] load = load_a
    cdef int[:] worst = worst_a
    cdef long long m
    cdef int l, r, t, rr, cur
    cdef bint ok
    for m in range(k):
        for r in range(nR):
            load[r] = 0
            worst[r] = -1
        for l in range(nL):
            r = M[m, l]
            if r >= 0:
                load[r] += 1
                rr = rR[r, l]
                if rr > worst[r]:
                    worst[r] = rr
        ok = True
        for l in range(nL):
            if not ok:
                break
            cur = rL[l, M[m, l]] if M[m, l] >= 0 else C_UNRANKED
            for t in range(a_idx[l], a_idx[l + 1]):
                r = a[t]
                if r == M[m, l]:
                    continue
                if _blocks(rL[l, r], cur, False,
                           rR[r, l], worst[r] if load[r] > 0 else C_UNRANKED,
                           load[r] < cap[r], crit):
                    ok = False
                    break
        mk[m] = 1 if ok else 0
    return mask


def stable_mask_sr(mats, adj_idx, adj, rank, criterion):
    m_arr = np.ascontiguousarray(mats, dtype=np.int32)
    cdef const int[:, :] M = m_arr
    cdef const int[:] a_idx = np.ascontiguousarray(adj_idx, dtype=np.intc)
    cdef const int[:] a = np.ascontiguousarray(adj, dtype=np.intc)
    cdef const int[:, :] R = np.ascontiguousarray(rank, dtype=np.intc)
    cdef int crit = criterion
    cdef long long k = M.shape[0]
    cdef int n = M.shape[1]
    mask = np.ones(k, dtype=np.uint8)
    cdef unsigned char[:] mk = mask
    cdef long long m
    cdef int i, j, t, cur_i, cur_j
    cdef bint ok
    for m in range(k):
        ok = True
        for i in range(n):
            if not ok:
                break
            cur_i = R[i, M[m, i]] if M[m, i] >= 0 else C_UNRANKED
            for t in range(a_idx[i], a_idx[i + 1]):
                j = a[t]
                if j <= i or j == M[m, i]:
                    continue
                cur_j = R[j, M[m, j]] if M[m, j] >= 0 else C_UNRANKED
                if _blocks(R[i, j], cur_i, False, R[j, i], cur_j, False, crit):
                    ok = False
                    break
        mk[m] = 1 if ok else 0
    return mask


def stable_mask_spas(mats, adj_idx, adj, rankL, proj_cap, proj_lec, lec_cap,
                     lec_rank, criterion):
    m_arr = np.ascontiguousarray(mats, dtype=np.int32)
    cdef const int[:, :] M = m_arr
    cdef const int[:] a_idx = np.ascontiguousarray(adj_idx, dtype=np.intc)
    cdef const int[:] a = np.ascontiguousarray(adj, dtype=np.intc)
    cdef const int[:, :] rL = np.ascontiguousarray(rankL, dtype=np.intc)
    cdef const int[:] pcap = np.ascontiguousarray(proj_cap, dtype=np.intc)
    cdef const int[:] plec = np.ascontiguousarray(proj_lec, dtype=np.intc)
    cdef const int[:] lcap = np.ascontiguousarray(lec_cap, dtype=np.intc)
    cdef const int[:, :] lrk = np.ascontiguousarray(lec_rank, dtype=np.intc)
    cdef int crit = criterion
    cdef long long k = M.shape[0]
    cdef int nL = M.shape[1]
    cdef int nP = pcap.shape[0]
    cdef int nLec = lcap.shape[0]
    mask = np.ones(k, dtype=np.uint8)
    cdef unsigned char[:] mk = mask
    p_load_a = np.empty(nP, dtype=np.intc)
    l_load_a = np.empty(nLec, dtype=np.intc)
    p_worst_a = np.empty(nP, dtype=np.intc)
    l_worst_a = np.empty(nLec, dtype=np.intc)
    cdef int[:] p_load = p_load_a
    cdef int[:] l_load = l_load_a
    cdef int[:] p_worst = p_worst_a
    cdef int[:] l_worst = l_worst_a
    cdef long long m
    cdef int s, p, t, lec, r
    cdef bint ok, hit
    for m in range(k):
        for p in range(nP):
            p_load[p] = 0
            p_worst[p] = -1
        for lec in range(nLec):
            l_load[lec] = 0
            l_worst[lec] = -1
        for s in range(nL):
            p = M[m, s]
            if p < 0:
                continue
            lec = plec[p]
            p_load[p] += 1
            l_load[lec] += 1
            r = lrk[lec, s]
            if r > p_worst[p]:
                p_worst[p] = r
            if r > l_worst[lec]:
                l_worst[lec] = r
        ok = True
        for s in range(nL):
            if not ok:
                break
            for t in range(a_idx[s], a_idx[s + 1]):
                p = a[t]
                if p == M[m, s]:
                    continue
                if crit == C_WEAK:
                    hit = _spa_blocks(M, m, s, p, True, True, rL, pcap, plec,
                                      lcap, lrk, p_load, l_load, p_worst, l_worst)
                elif crit == C_SUPER:
                    hit = _spa_blocks(M, m, s, p, False, False, rL, pcap, plec,
                                      lcap, lrk, p_load, l_load, p_worst, l_worst)
                else:
                    hit = _spa_blocks(M, m, s, p, True, False, rL, pcap, plec,
                                      lcap, lrk, p_load, l_load, p_worst, l_worst) or \
                        _spa_blocks(M, m, s, p, False, True, rL, pcap, plec,
                                    lcap, lrk, p_load, l_load, p_worst, l_worst)
                if hit:
                    ok = False
                    break
        mk[m] = 1 if ok else 0
    return mask


cdef inline bint _spa_blocks(const int[:, :] M, long long m, int s, int p,
                             bint strict_s, bint strict_l,
                             const int[:, :] rL, const int[:] pcap,
                             const int[:] plec, const int[:] lcap,
                             const int[:, :] lrk,
                             int[:] p_load, int[:] l_load,
                             int[:] p_worst, int[:] l_worst):
    cdef int cur = M[m, s]
    if cur >= 0:
        if strict_s:
            if rL[s, p] >= rL[s, cur]:
                return False
        else:
            if rL[s, p] > rL[s, cur]:
                return False
    cdef int lec = plec[p]
    cdef bint p_under = p_load[p] < pcap[p]
    cdef bint l_under = l_load[lec] < lcap[lec]
    cdef int r, w
    if p_under and l_under:
        return True
    r = lrk[lec, s]
    if p_under:
        if cur >= 0 and plec[cur] == lec:
            return True
        w = l_worst[lec]
        return r < w if strict_l else r <= w
    w = p_worst[p]
    return r < w if strict_l else r <= w


def best_profile_index(mats, rankL, R, mode):
    m_arr = np.ascontiguousarray(mats, dtype=np.int32)
    cdef const int[:, :] M = m_arr
    cdef const int[:, :] rL = np.ascontiguousarray(rankL, dtype=np.intc)
    cdef int c_R = R
    cdef int c_mode = mode
    cdef long long k = M.shape[0]
    cdef int nL = M.shape[1]
    if k == 0:
        return -1
    prof_a = np.empty(c_R, dtype=np.intc)
    best_a = np.empty(c_R, dtype=np.intc)
    cdef int[:] prof = prof_a
    cdef int[:] best_prof = best_a
    cdef long long best = 0, m
    cdef int b_size = 0, b_cost = 0, size, cost, l, r, rk, i
    cdef bint better
    _profile(M, 0, rL, prof, &b_size, &b_cost)
    for i in range(c_R):
        best_prof[i] = prof[i]
    for m in range(1, k):
        _profile(M, m, rL, prof, &size, &cost)
        better = False
        if c_mode == 0:
            better = _lex_greater(prof, best_prof, c_R)
        elif c_mode == 1:
            better = size > b_size or (size == b_size and cost < b_cost)
        elif c_mode == 3:
            better = size > b_size or \
                (size == b_size and _gen_better(prof, best_prof, c_R))
        else:
            better = size > b_size or \
                (size == b_size and _lex_greater(prof, best_prof, c_R))
        if better:
            best = m
            b_size = size
            b_cost = cost
            for i in range(c_R):
                best_prof[i] = prof[i]
    return best


cdef inline void _profile(const int[:, :] M, long long m, const int[:, :] rL,
                          int[:] prof, int* size, int* cost):
    cdef int nL = M.shape[1]
    cdef int R = prof.shape[0]
    cdef int i, l, r, rk
    for i in range(R):
        prof[i] = 0
    size[0] = 0
    cost[0] = 0
    for l in range(nL):
        r = M[m, l]
        if r >= 0:
            rk = rL[l, r]
            prof[rk] += 1
            size[0] += 1
            cost[0] += rk + 1


cdef inline bint _lex_greater(const int[:] a, const int[:] b, int R):
    cdef int i
    for i in range(R):
        if a[i] != b[i]:
            return a[i] > b[i]
    return False


cdef inline bint _gen_better(const int[:] a, const int[:] b, int R):
    cdef int i
    for i in range(R - 1, -1, -1):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False
