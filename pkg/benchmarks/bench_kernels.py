"""Timing comparison of the compiled kernels against the pure fallback.

Runs the same workloads through matchkit._kernels.pure and, when built,
matchkit._kernels._ckern, checks both produce identical answers and
prints a speedup table.  Usage:

    python benchmarks/bench_kernels.py [--sm-n 7] [--sr-n 12] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from matchkit._kernels import pure
from matchkit.generator import generate, params_from_wire
from matchkit.model import ProblemClass
from matchkit.oracle import encode

try:
    from matchkit._kernels import _ckern as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def workloads(sm_n, sr_n):
    sm = generate(
        ProblemClass.SM,
        params_from_wire(ProblemClass.SM, {"numOfAgents": sm_n, "seed": 1}),
    )[0]
    sr = generate(
        ProblemClass.SR,
        params_from_wire(
            ProblemClass.SR,
            {"numOfRoommates": sr_n, "preferenceListDensity": 1.0, "seed": 1},
        ),
    )[0]
    enc_sm, enc_sr = encode(sm), encode(sr)
    limit = 5_000_000

    _, mats_sm = pure.enum_bipartite(
        len(enc_sm.left), len(enc_sm.right), enc_sm.adj_idx, enc_sm.adj,
        enc_sm.right_cap, enc_sm.group, enc_sm.group_cap, limit,
    )
    _, mats_sr = pure.enum_sr(sr_n, enc_sr.adj_idx, enc_sr.adj, limit)

    def bench_set(k):
        return [
            (
                f"enum_bipartite      (SM n={sm_n}, {len(mats_sm)} rows)",
                lambda: k.enum_bipartite(
                    len(enc_sm.left), len(enc_sm.right), enc_sm.adj_idx,
                    enc_sm.adj, enc_sm.right_cap, enc_sm.group,
                    enc_sm.group_cap, limit,
                )[1],
            ),
            (
                f"enum_sr             (SR n={sr_n}, {len(mats_sr)} rows)",
                lambda: k.enum_sr(sr_n, enc_sr.adj_idx, enc_sr.adj, limit)[1],
            ),
            (
                "stable_mask_bipartite",
                lambda: k.stable_mask_bipartite(
                    mats_sm, enc_sm.adj_idx, enc_sm.adj, enc_sm.rankL,
                    enc_sm.rankR, enc_sm.right_cap, k.WEAK,
                ),
            ),
            (
                "stable_mask_sr",
                lambda: k.stable_mask_sr(
                    mats_sr, enc_sr.adj_idx, enc_sr.adj, enc_sr.rankL, k.WEAK
                ),
            ),
            (
                "best_profile_index  (generous)",
                lambda: k.best_profile_index(
                    mats_sm, enc_sm.rankL, int(enc_sm.rankL.max()) + 1, 3
                ),
            ),
        ]

    return bench_set


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sm-n", type=int, default=7)
    ap.add_argument("--sr-n", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    bench_set = workloads(args.sm_n, args.sr_n)
    pure_rows = bench_set(pure)
    comp_rows = bench_set(compiled) if compiled is not None else None

    print(f"kernel backend comparison (best of {args.repeat})")
    header = f"{'kernel':<46} {'pure':>10}"
    if comp_rows:
        header += f" {'compiled':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for i, (label, fn) in enumerate(pure_rows):
        t_pure, r_pure = best_of(fn, args.repeat)
        line = f"{label:<46} {t_pure * 1e3:>8.1f}ms"
        if comp_rows:
            t_comp, r_comp = best_of(comp_rows[i][1], args.repeat)
            same = (
                np.array_equal(r_pure, r_comp)
                if isinstance(r_pure, np.ndarray)
                else r_pure == r_comp
            )
            if not same:
                raise SystemExit(f"backend mismatch on {label!r}")
            line += f" {t_comp * 1e3:>8.1f}ms {t_pure / t_comp:>8.1f}x"
        print(line)
    if comp_rows is None:
        print("compiled backend not built; showing pure timings only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
