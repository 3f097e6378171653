"""Parity between the compiled kernels and the pure Python reference."""

import numpy as np
import pytest

from matchkit._kernels import backend_name, pure

ck = pytest.importorskip(
    "matchkit._kernels._ckern", reason="compiled kernel not built"
)


def _csr(lists):
    idx = np.zeros(len(lists) + 1, dtype=np.int32)
    for i, l in enumerate(lists):
        idx[i + 1] = idx[i] + len(l)
    return idx, np.array([x for l in lists for x in l], dtype=np.int32)


def _random_bipartite(rng, with_groups):
    nL = int(rng.integers(1, 6))
    nR = int(rng.integers(1, 6))
    lists = [
        sorted(rng.permutation(nR)[: rng.integers(0, nR + 1)].tolist())
        for _ in range(nL)
    ]
    adj_idx, adj = _csr(lists)
    caps = rng.integers(1, 4, size=nR).astype(np.int32)
    if with_groups:
        nG = int(rng.integers(1, 3))
        group = rng.integers(0, nG, size=nR).astype(np.int32)
        gcap = rng.integers(1, 4, size=nG).astype(np.int32)
    else:
        group = np.full(nR, -1, dtype=np.int32)
        gcap = np.zeros(0, dtype=np.int32)
    rankL = rng.integers(0, nR, size=(nL, nR)).astype(np.int32)
    rankR = rng.integers(0, nL, size=(nR, nL)).astype(np.int32)
    return nL, nR, adj_idx, adj, caps, group, gcap, rankL, rankR


class TestBipartiteParity:
    def test_enum_and_masks_match(self, rng):
        for trial in range(60):
            nL, nR, adj_idx, adj, caps, group, gcap, rankL, rankR = (
                _random_bipartite(rng, with_groups=trial % 3 == 0)
            )
            ok_p, mp = pure.enum_bipartite(
                nL, nR, adj_idx, adj, caps, group, gcap, 10**6
            )
            ok_c, mc = ck.enum_bipartite(
                nL, nR, adj_idx, adj, caps, group, gcap, 10**6
            )
            assert ok_p == ok_c
            assert mp.shape == mc.shape
            assert (mp == mc).all()
            for crit in (0, 1, 2):
                a = pure.stable_mask_bipartite(
                    mp, adj_idx, adj, rankL, rankR, caps, crit
                )
                b = ck.stable_mask_bipartite(
                    mc, adj_idx, adj, rankL, rankR, caps, crit
                )
                assert (a == b).all()

    def test_limit_truncates_identically(self, rng):
        nL, nR = 4, 4
        lists = [[0, 1, 2, 3]] * 4
        adj_idx, adj = _csr(lists)
        caps = np.ones(4, dtype=np.int32)
        group = np.full(4, -1, dtype=np.int32)
        gcap = np.zeros(0, dtype=np.int32)
        ok_p, mp = pure.enum_bipartite(nL, nR, adj_idx, adj, caps, group, gcap, 10)
        ok_c, mc = ck.enum_bipartite(nL, nR, adj_idx, adj, caps, group, gcap, 10)
        assert not ok_p and not ok_c
        assert mp.shape == (10, 4)
        assert (mp == mc).all()


class TestRoommatesParity:
    def test_enum_and_mask_match(self, rng):
        for _ in range(60):
            n = int(rng.integers(1, 7))
            lists = []
            for i in range(n):
                others = [j for j in range(n) if j != i]
                take = int(rng.integers(0, n))
                lists.append(sorted(rng.permutation(others)[:take].tolist()))
            adj_idx, adj = _csr(lists)
            rank = rng.integers(0, n, size=(n, n)).astype(np.int32)
            ok_p, mp = pure.enum_sr(n, adj_idx, adj, 10**6)
            ok_c, mc = ck.enum_sr(n, adj_idx, adj, 10**6)
            assert ok_p == ok_c
            assert (mp == mc).all()
            for crit in (0, 1, 2):
                a = pure.stable_mask_sr(mp, adj_idx, adj, rank, crit)
                b = ck.stable_mask_sr(mc, adj_idx, adj, rank, crit)
                assert (a == b).all()


class TestSpasParity:
    def test_masks_match(self, rng):
        for _ in range(40):
            nL, nR, adj_idx, adj, caps, group, gcap, rankL, _ = _random_bipartite(
                rng, with_groups=True
            )
            nG = len(gcap)
            lec_rank = rng.integers(0, nL + 1, size=(nG, nL)).astype(np.int32)
            ok, mats = pure.enum_bipartite(
                nL, nR, adj_idx, adj, caps, group, gcap, 10**6
            )
            assert ok
            for crit in (0, 1, 2):
                a = pure.stable_mask_spas(
                    mats, adj_idx, adj, rankL, caps, group, gcap, lec_rank, crit
                )
                b = ck.stable_mask_spas(
                    mats, adj_idx, adj, rankL, caps, group, gcap, lec_rank, crit
                )
                assert (a == b).all()


class TestProfileScanParity:
    def test_all_modes_match(self, rng):
        for _ in range(60):
            nL, nR, adj_idx, adj, caps, group, gcap, rankL, _ = _random_bipartite(
                rng, with_groups=False
            )
            ok, mats = pure.enum_bipartite(
                nL, nR, adj_idx, adj, caps, group, gcap, 10**6
            )
            assert ok
            R = nR
            for mode in range(5):
                a = pure.best_profile_index(mats, rankL, R, mode)
                b = ck.best_profile_index(mats, rankL, R, mode)
                assert a == b


def test_compiled_backend_selected_by_default(monkeypatch):
    assert backend_name() in ("compiled", "pure")
