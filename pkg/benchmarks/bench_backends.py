#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy twins.

    python3 benchmarks/bench_backends.py [--points 200000] [--repeat 5]

Both variants are always importable (the env flag only selects which one the
library dispatches to), so a single process can compare them.  Each row also
reports the largest deviation between the two outputs.
"""
import argparse
import time

import numpy as np

from pshgauss import kernels
from pshgauss.catalog import get_entry
from pshgauss.expr import compile_program
from pshgauss.gauss import sample_complex_gaussian
from pshgauss.operators import L


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    Z = sample_complex_gaussian(2, rng, args.points)
    cases = []

    for name in ("norm2_cube", "exp_half", "holo_sq"):
        e = L(get_entry(name, 2).expr, 2)
        p = compile_program(e)
        cases.append((f"eval L({name})", lambda p=p: kernels.eval_program_numba(p.ops, p.args, p.consts, Z, p.depth),
                      lambda p=p: kernels.eval_program_numpy(p.ops, p.args, p.consts, Z, p.depth)))

    v = rng.standard_normal(args.points * 4)
    cases.append(("pairwise_sum", lambda: kernels.pairwise_sum_numba(v), lambda: kernels.pairwise_sum_numpy(v)))

    mats = []
    for _ in range(200):
        B = rng.standard_normal((8, 8))
        mats.append(B + B.T)
    cases.append(("jacobi 8x8 x200",
                  lambda: np.array([kernels.jacobi_eigvalsh_numba(M) for M in mats]),
                  lambda: np.array([kernels.jacobi_eigvalsh_numpy(M) for M in mats])))

    from scipy.linalg import eigvalsh_tridiagonal

    m = 64
    guess = eigvalsh_tridiagonal(np.zeros(m), np.sqrt(np.arange(1, m) / 2.0))
    cases.append(("hermite_newton m=64", lambda: kernels.hermite_newton_numba(guess)[0],
                  lambda: kernels.hermite_newton_numpy(guess)[0]))

    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max dev':>12}")
    for label, fnb, fnp in cases:
        tb, ob = best_of(fnb, args.repeat)
        tp, op = best_of(fnp, max(1, args.repeat // 2))
        dev = float(np.max(np.abs(np.asarray(ob) - np.asarray(op))))
        print(f"{label:<24}{tb:>12.4g}{tp:>12.4g}{tp / tb:>10.1f}{dev:>12.2g}")


if __name__ == "__main__":
    main()
