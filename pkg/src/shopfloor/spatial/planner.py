"""Optimal grid path planning between world coordinates.

Wraps the selected grid-search kernel: plans over 8-connected cells with unit
axial and sqrt(2) diagonal costs, then lifts the cell path to world-coordinate
waypoints at cell centers. Path lengths are reconstructed from exact axial /
diagonal move counts, so equal-cost paths have bit-identical lengths.

The search itself is pluggable (any callable with the kernel signature), which
keeps the door open for planners with kinematic constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._kernels import astar_grid
from .grid import GridError, GridMap

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Path:
    waypoints: tuple[tuple[float, float], ...]
    length: float
    n_axial: int
    n_diagonal: int

    def __len__(self) -> int:
        return len(self.waypoints)


def _cells_to_path(cells: list[tuple[int, int]], grid: GridMap) -> Path:
    n_axial = 0
    n_diag = 0
    for (r0, c0), (r1, c1) in zip(cells, cells[1:]):
        if r0 != r1 and c0 != c1:
            n_diag += 1
        else:
            n_axial += 1
    length = (n_axial + n_diag * SQRT2) * grid.resolution
    waypoints = tuple(grid.cell_center(r, c) for r, c in cells)
    return Path(waypoints=waypoints, length=length, n_axial=n_axial, n_diagonal=n_diag)


def plan_path(
    grid: GridMap,
    start: tuple[float, float],
    goal: tuple[float, float],
    search=astar_grid,
) -> Path | None:
    """Lowest-cost path between two world positions, or None when unreachable."""
    start_cell = grid.world_to_cell(*start)
    goal_cell = grid.world_to_cell(*goal)
    if grid.cells[start_cell]:
        raise GridError(f"start {start} lies in an occupied cell")
    if grid.cells[goal_cell]:
        raise GridError(f"goal {goal} lies in an occupied cell")
    cells = search(np.ascontiguousarray(grid.cells, dtype=np.uint8), start_cell, goal_cell)
    if cells is None:
        return None
    return _cells_to_path([tuple(c) for c in cells], grid)
