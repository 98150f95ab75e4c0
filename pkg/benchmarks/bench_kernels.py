"""Compare the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Both backends are imported
directly so the comparison does not depend on ``CVPOL_PURE_PYTHON``.
"""

import argparse
import math
import timeit

import numpy as np

from cvpol import _kernels_py

try:
    from cvpol import _kernels as _compiled
except ImportError:
    _compiled = None


def _batch_args(k, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(k, 4, 4))
    m = np.eye(4) + 0.1 * (a @ np.swapaxes(a, 1, 2))
    return rng.random(k) * 50, rng.random(k) * 50, rng.uniform(0, 2 * math.pi, k), m


def _optimizer_sweep(backend, schemes=range(7), grid=np.logspace(-2, 4, 13)):
    for scheme in schemes:
        for n in grid:
            backend.optimize_scheme(scheme, float(n), 1e-10)


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--states", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=20260101)
    args = parser.parse_args()

    batch = _batch_args(args.states, args.seed)
    cases = [
        (f"stokes_variances_batch ({args.states} states)", lambda b: b.stokes_variances_batch(*batch)),
        ("optimize_scheme (7 schemes x 13 budgets)", _optimizer_sweep),
    ]
    print(f"{'kernel':45s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, fn in cases:
        slow = _time(lambda: fn(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{label:45s} {1e3 * slow:12.2f} {'n/a':>12s} {'n/a':>8s}")
            continue
        fast = _time(lambda: fn(_compiled), args.repeat)
        print(f"{label:45s} {1e3 * slow:12.2f} {1e3 * fast:12.2f} {slow / fast:7.1f}x")
    if _compiled is None:
        print("compiled extension not built; reinstall with Cython available")


if __name__ == "__main__":
    main()
