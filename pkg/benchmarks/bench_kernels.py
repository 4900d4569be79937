"""Benchmark the compiled kernels against their pure NumPy twins.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from shopfloor._kernels import BACKEND, astar_py, sumtree_py

try:
    from shopfloor._kernels import astar_c, sumtree_c
except ImportError:
    astar_c = sumtree_c = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sumtree(cls, capacity=100_000, batches=200, batch=64):
    rng = np.random.default_rng(0)
    tree = cls(capacity)
    tree.update(np.arange(capacity), rng.random(capacity))
    idx = rng.integers(0, capacity, size=(batches, batch))
    vals = rng.random((batches, batch))
    draws = rng.random((batches, batch)) * tree.total * (1 - 1e-12)

    def work():
        for i in range(batches):
            tree.find(draws[i])
            tree.update(idx[i], vals[i])

    return timeit(work)


def bench_astar(search, size=120, density=0.25, cases=60):
    rng = np.random.default_rng(1)
    problems = []
    while len(problems) < cases:
        grid = (rng.random((size, size)) < density).astype(np.uint8)
        free = np.argwhere(grid == 0)
        s, g = free[rng.choice(len(free), size=2, replace=False)]
        problems.append((grid, tuple(s), tuple(g)))

    def work():
        for grid, s, g in problems:
            search(grid, s, g)

    return timeit(work, repeats=3)


def main():
    print(f"active backend: {BACKEND}")
    rows = []
    t = bench_sumtree(sumtree_py.SumTree)
    rows.append(("sum-tree find+update (200x64, 100k leaves)", "python", t))
    if sumtree_c is not None:
        tc = bench_sumtree(sumtree_c.SumTree)
        rows.append(("sum-tree find+update (200x64, 100k leaves)", "compiled", tc))
    t = bench_astar(astar_py.astar_grid)
    rows.append(("grid search (60 problems, 120x120)", "python", t))
    if astar_c is not None:
        tc = bench_astar(astar_c.astar_grid)
        rows.append(("grid search (60 problems, 120x120)", "compiled", tc))

    width = max(len(r[0]) for r in rows)
    print(f"{'benchmark'.ljust(width)}  backend   seconds")
    base = {}
    for name, backend, seconds in rows:
        base.setdefault(name, seconds)
        speedup = base[name] / seconds
        print(f"{name.ljust(width)}  {backend:<8}  {seconds:8.4f}  ({speedup:4.1f}x)")


if __name__ == "__main__":
    main()
