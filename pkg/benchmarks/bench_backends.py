"""Compare the numba and numpy kernel backends on the hot paths.

Usage: python benchmarks/bench_backends.py [--trials N] [--scale L]

Timings exclude one warmup call per kernel so jit compilation does not
pollute the numbers.  Results from both backends are asserted equal
before any timing is reported.
"""

import argparse
import time
from fractions import Fraction

from perc3d import (
    active_backend,
    label_clusters,
    lower_event,
    make_block_geometry,
    make_rect_geometry,
    sample_block,
    sample_rect,
    set_backend,
    transfer_matrix,
    upper_event,
)
from perc3d._backend import HAVE_NUMBA


def time_case(fn, trials):
    fn(0)
    t0 = time.perf_counter()
    for i in range(trials):
        fn(i + 1)
    return (time.perf_counter() - t0) / trials


def bench(backend, trials, scale):
    set_backend(backend)
    assert active_backend() == backend
    p = Fraction(2488, 10000)
    g = make_block_geometry(scale, "bond")
    r = make_rect_geometry(scale // 2, "bond")

    def lower_case(seed):
        return lower_event(sample_block(g, p, seed), g).holds

    def upper_case(seed):
        return upper_event(sample_rect(r, p, seed), r).holds

    def label_case(seed):
        return int(label_clusters(sample_block(g, p, seed)).labels.max())

    def matrix_case(_seed):
        return transfer_matrix(3).entries

    rows = {}
    checks = {}
    for name, fn in (("lower_event", lower_case), ("upper_event", upper_case),
                     ("label_clusters", label_case), ("transfer_matrix k=3", matrix_case)):
        rows[name] = time_case(fn, trials if name != "transfer_matrix k=3" else max(1, trials // 10))
        checks[name] = tuple(fn(s) for s in range(5))
    set_backend(None)
    return rows, checks


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--scale", type=int, default=16)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {}
    checks = {}
    for b in backends:
        print(f"benchmarking backend: {b}")
        results[b], checks[b] = bench(b, args.trials, args.scale)
    if len(backends) == 2:
        assert checks["numpy"] == checks["numba"], "backend results disagree"
        print("backend outputs identical on probe seeds")
    print()
    print(f"{'case':<22}" + "".join(f"{b + ' (ms)':>14}" for b in backends) +
          ("      speedup" if len(backends) == 2 else ""))
    for name in results[backends[0]]:
        line = f"{name:<22}"
        for b in backends:
            line += f"{results[b][name] * 1000:>14.3f}"
        if len(backends) == 2 and results['numba'][name] > 0:
            line += f"{results['numpy'][name] / results['numba'][name]:>12.1f}x"
        print(line)


if __name__ == "__main__":
    main()
