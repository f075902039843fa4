"""Time the compiled and pure-numpy kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--t 2000] [--n 10] [--p 4] [--repeat 5]

The compiled backend is warmed up once before timing so the one-off JIT
compile is excluded.
"""
import argparse
import timeit

import numpy as np

from rkf import kernels
from rkf.drift import DriftSpec, generate
from rkf.filter import whitening
from rkf.model import random_stable_system


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=int, default=2000)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--p", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    model = random_stable_system(args.n, args.p, 0)
    w = whitening(model)
    yw = np.ascontiguousarray(w.outputs(generate(model, DriftSpec(seed=0), args.t).observations))
    x0, s0 = np.zeros(args.n), np.eye(args.n)

    cases = {
        f"kalman_pass T={args.t}": lambda b: b.kalman_pass(model.a, w.cw, model.q, yw, x0, s0),
        "riccati_iterate": lambda b: b.riccati_iterate(model.a, w.cw, model.q, s0, 1e-12, 100000),
    }
    print(f"n={args.n} p={args.p}; best of {args.repeat}, milliseconds")
    print(f"{'case':<24}{'numba':>10}{'numpy':>10}{'speedup':>9}")
    for label, fn in cases.items():
        best = {}
        for name in ("numba", "numpy"):
            backend = kernels.get_backend(name)
            fn(backend)
            best[name] = 1e3 * min(timeit.repeat(lambda: fn(backend), number=1, repeat=args.repeat))
        print(f"{label:<24}{best['numba']:>10.2f}{best['numpy']:>10.2f}{best['numpy'] / best['numba']:>8.1f}x")


if __name__ == "__main__":
    main()
