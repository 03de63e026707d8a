"""Compare the compiled and pure-Python Boolean matrix kernels.

Run ``python3 benchmarks/bench_kernels.py``.  The first table times each kernel
on random matrices; the second times a full ``solve`` per backend, each in a
fresh interpreter so the backend is chosen at import.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time
import timeit

from monoprune import _pykernels

try:
    from monoprune import _ckernels
except ImportError:
    _ckernels = None

KERNELS = ("mat_or", "mat_and", "mat_mul", "mat_closure", "mat_complement", "mat_leq")


def random_matrix(rng: random.Random, n: int, density: float = 0.2) -> tuple:
    # upper-triangular, like the matrices strings produce
    return tuple(sum(1 << j for j in range(i, n) if rng.random() < density) for i in range(n))


def args_for(name: str, a, b):
    return (a,) if name in ("mat_closure", "mat_complement") else (a, b)


def time_kernels(dims, number: int, seed: int = 0):
    rng = random.Random(seed)
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':<16}{'n':>4}" + "".join(f"{b + ' us':>14}" for b, _ in backends) + f"{'speedup':>10}")
    for n in dims:
        a, b = random_matrix(rng, n), random_matrix(rng, n)
        for name in KERNELS:
            cells = []
            for _, mod in backends:
                fn, args = getattr(mod, name), args_for(name, a, b)
                cells.append(min(timeit.repeat(lambda: fn(*args), number=number, repeat=3)) / number * 1e6)
            speed = f"{cells[0] / cells[1]:>9.1f}x" if len(cells) == 2 else ""
            print(f"{name:<16}{n:>4}" + "".join(f"{c:>14.2f}" for c in cells) + speed)


def time_solve(problems):
    print(f"\n{'problem':<16}{'backend':>10}{'seconds':>10}")
    for prob in problems:
        for backend, pure in (("python", "1"), ("cython", "0")):
            env = dict(os.environ, MONOPRUNE_PURE_PYTHON=pure)
            start = time.perf_counter()
            subprocess.run([sys.executable, "-m", "monoprune", "solve", prob], env=env, check=True,
                           capture_output=True)
            print(f"{prob:<16}{backend:>10}{time.perf_counter() - start:>10.2f}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="4,10,32,64")
    ap.add_argument("--number", type=int, default=2000)
    ap.add_argument("--solve", default="regex_matrix,csv_small", help="comma-separated problems; empty to skip")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; timing the pure-Python backend only")
    time_kernels([int(d) for d in args.dims.split(",")], args.number)
    if args.solve:
        time_solve(args.solve.split(","))


if __name__ == "__main__":
    main()
