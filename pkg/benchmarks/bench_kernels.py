"""Compiled vs pure-Python kernels.

    python benchmarks/bench_kernels.py [--quick]

Prints median wall-clock per kernel call and the speed-up.  Simulation
kernels are also checked for bit-identical output on the timed inputs.
"""
import sys
import timeit

import numpy as np

from careless import _pykernels

try:
    from careless import _kernels
except ImportError:
    sys.exit("compiled kernels not built; run `pip install -e . --no-build-isolation`")


def _gen(seed=1):
    return np.random.PCG64(seed)


def cases(quick):
    scale = 4 if quick else 1
    return [
        ("hessenberg_solve n=1000", lambda k: k.hessenberg_solve(1000, 0.01), 5),
        (f"hessenberg_solve n={4000 // scale}", lambda k: k.hessenberg_solve(4000 // scale, 0.01), 3),
        ("reduced_hitting_time n=10 p=0.1 x200",
         lambda k: [k.reduced_hitting_time(_gen(s), 10, 0.1, 10**6) for s in range(200 // scale)], 3),
        ("reduced_trajectory n=200 p=0.01 T=5000",
         lambda k: k.reduced_trajectory(_gen(), 200, 0.01, 5000 // scale), 3),
        ("full_trajectory n=50 p=0.02 T=2000",
         lambda k: k.full_trajectory(_gen(), 50, 0.02, 2000 // scale), 3),
        ("coupled_run n=10 p=0.05/0.1 x40",
         lambda k: [k.coupled_run(_gen(s), 10, 0.05, 0.1, 10**5) for s in range(40 // scale)], 3),
    ]


def main(argv):
    quick = "--quick" in argv
    print(f"{'kernel':44s} {'cython':>10s} {'python':>10s} {'speed-up':>9s}")
    for name, fn, reps in cases(quick):
        times = {}
        for mod in (_kernels, _pykernels):
            times[mod.NAME] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=reps))
        if not name.startswith("hessenberg"):
            a, b = fn(_kernels), fn(_pykernels)
            same = all(np.array_equal(x, y) for x, y in zip(np.atleast_1d(a), np.atleast_1d(b))) \
                if not isinstance(a, list) else a == b
            assert same, f"{name}: backends disagree"
        cy, py = times["cython"], times["python"]
        print(f"{name:44s} {cy * 1e3:8.2f}ms {py * 1e3:8.2f}ms {py / cy:8.1f}x")


if __name__ == "__main__":
    main(sys.argv[1:])
