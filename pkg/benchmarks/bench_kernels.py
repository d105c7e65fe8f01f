"""Time the braid-sum kernels jitted vs. plain Python.

    python benchmarks/bench_kernels.py [--u 3 --v 2 --repeat 3]

Both paths run on the same integer-coded table; the script also checks
that they agree bit for bit.
"""

import argparse
import time

import numpy as np

from incidence_braid import _kernels as K
from incidence_braid.braid import _boxes_array
from incidence_braid.families import FamilyParams, lambda_build, shift_spec
from incidence_braid.poset import inclusion_pairs
from incidence_braid.scalar import GF


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--u", type=int, default=3)
    ap.add_argument("--v", type=int, default=2)
    ap.add_argument("--prime", type=int, default=101)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = FamilyParams.make(GF(args.prime), -1, 3, 1, -2, "-5/6")
    tab = lambda_build(shift_spec(args.u, args.v), params)
    co = tab.coded
    boxes = _boxes_array(list(inclusion_pairs(tab.P, 3)))
    n = len(boxes)

    def run(fn):
        out_l = np.zeros(n, dtype=np.int64)
        out_r = np.zeros(n, dtype=np.int64)
        fn(co.lam, co.yidx, co.L, co.R, co.mem, co.memlen, boxes, co.mod, out_l, out_r)
        return out_l, out_r

    jit_res = run(K.lbe_rbe_batch)  # compile / load cache
    py_res = run(K.py(K.lbe_rbe_batch))
    same = all(np.array_equal(a, b) for a, b in zip(jit_res, py_res))

    t_jit = best_of(lambda: run(K.lbe_rbe_batch), args.repeat)
    t_py = best_of(lambda: run(K.py(K.lbe_rbe_batch)), max(1, args.repeat // 3))
    print(f"spec (u,v)=({args.u},{args.v}) over GF({args.prime}): {n} inclusions")
    print(f"numba available: {K.HAS_NUMBA}")
    print(f"jitted : {t_jit * 1e3:9.2f} ms")
    print(f"python : {t_py * 1e3:9.2f} ms")
    if t_jit > 0:
        print(f"speedup: {t_py / t_jit:9.1f}x")
    print(f"results identical: {same}")


if __name__ == "__main__":
    main()
