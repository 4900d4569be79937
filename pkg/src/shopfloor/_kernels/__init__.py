"""Kernel backend selection.

The sum-tree and grid-search inner loops dominate replay sampling and offline
graph construction, so both ship as optional compiled extensions with pure
NumPy twins. The compiled versions are used when importable; both expose the
same API and produce identical results (see tests/test_kernels.py and
benchmarks/bench_kernels.py).
"""

from . import astar_py, sumtree_py

try:  # pragma: no cover - depends on whether the extensions were built
    from . import astar_c, sumtree_c

    SumTree = sumtree_c.SumTree
    astar_grid = astar_c.astar_grid
    BACKEND = "compiled"
except ImportError:  # pragma: no cover
    astar_c = None
    sumtree_c = None
    SumTree = sumtree_py.SumTree
    astar_grid = astar_py.astar_grid
    BACKEND = "python"

__all__ = ["SumTree", "astar_grid", "BACKEND", "astar_py", "sumtree_py", "astar_c", "sumtree_c"]
