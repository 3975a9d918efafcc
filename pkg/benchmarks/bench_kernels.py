"""Compare the compiled and pure-Python Givens kernels.

Two measurements:

* the raw kernel on a random upper-Hessenberg block with companion matrices
  sized like a drop at active-set size q in dimension n;
* end-to-end solves of generated Type-2 instances with each backend swapped in.

Usage:  python3 benchmarks/bench_kernels.py [--sizes 50,100,200] [--reps 20]
"""
import argparse
import time

import numpy as np

from mmqp import kernels
from mmqp.generator import GenSpec, generate
from mmqp.solver import solve


def hessenberg_case(q, n, seed=0):
    rng = np.random.default_rng(seed)
    R = np.triu(rng.standard_normal((q, q)))
    R[np.arange(1, q), np.arange(q - 1)] = rng.standard_normal(q - 1)
    M = rng.standard_normal((q, n))
    Rinv = rng.standard_normal((q, q))
    return R, M, Rinv


def time_kernel(fn, q, n, reps):
    cases = [hessenberg_case(q, n, seed=i) for i in range(reps)]
    t0 = time.perf_counter()
    for R, M, Rinv in cases:
        fn(R, M, Rinv, 0)
    return (time.perf_counter() - t0) / reps


def time_solve(fn, spec, reps):
    inst = generate(spec)
    saved = kernels.retriangularize
    kernels.retriangularize = fn
    try:
        t0 = time.perf_counter()
        for _ in range(reps):
            out = solve(inst.problem, trace=False)
        elapsed = (time.perf_counter() - t0) / reps
    finally:
        kernels.retriangularize = saved
    return elapsed, out.drops


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="25,50,100,200", help="active-set sizes q (n = 3q)")
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; only the python backend is available")
    names = sorted(backends)

    print("kernel: one full Hessenberg sweep (seconds per call)")
    print(f"{'q':>6} {'n':>6} " + " ".join(f"{b:>12}" for b in names) + "   speedup")
    for q in (int(s) for s in args.sizes.split(",")):
        n = 3 * q
        times = {b: time_kernel(backends[b], q, n, args.reps) for b in names}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{q:>6} {n:>6} " + " ".join(f"{times[b]:>12.3e}" for b in names) + f"   {speed:6.1f}x")

    print("\nsolve: Type-2 instances (seconds per solve)")
    for scale in ((50, 100, 150, 50), (100, 200, 300, 100)):
        spec = GenSpec(2, *scale, seed=3)
        res = {b: time_solve(backends[b], spec, max(1, args.reps // 10)) for b in names}
        drops = res[names[0]][1]
        line = " ".join(f"{b}={res[b][0]:.3e}" for b in names)
        print(f"  {scale} drops={drops}: {line}")


if __name__ == "__main__":
    main()
