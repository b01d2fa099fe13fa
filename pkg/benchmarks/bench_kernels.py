"""Time the LTS kernels: active backend against the numpy reference.

    python benchmarks/bench_kernels.py [--states N] [--repeat R]

Set OPSEM_NO_JIT=1 to make the active backend numpy as well.
"""
import argparse
import time

import numpy as np

from opsem.lts import _kernels as K


def random_edges(rng, n, degree):
    m = n * degree
    src = np.sort(rng.integers(0, n, m)).astype(np.int64)
    dst = rng.integers(0, n, m).astype(np.int64)
    return src, dst


def best(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--states", type=int, default=400)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    n = args.states
    src, dst = random_edges(rng, n, args.degree)
    codes = rng.integers(0, 8, len(src)).astype(np.int64)
    sel = rng.random(len(src)) < 0.5
    x = rng.random(n) < 0.5
    c = K.closure(n, src, dst)
    a = np.zeros((n, n), dtype=np.bool_)
    a[src, dst] = True
    cases = {
        "closure": (n, src, dst),
        "compose3": (c, a),
        "signatures": (n, src, codes),
        "pre_dia": (n, src, dst, sel, x),
        "pre_box": (n, src, dst, sel, x),
    }
    print("backend: %s, %d states, %d transitions" % (K.BACKEND, n, len(src)))
    print("%-12s %12s %12s %8s" % ("kernel", "active (ms)", "numpy (ms)", "speedup"))
    for name, argv in cases.items():
        fast = best(lambda: getattr(K, name)(*argv), args.repeat)
        ref = best(lambda: K.NUMPY[name](*argv), args.repeat)
        print("%-12s %12.3f %12.3f %8.1fx" % (name, fast * 1e3, ref * 1e3, ref / fast))


if __name__ == "__main__":
    main()
