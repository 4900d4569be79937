"""8-connected grid search, pure-Python implementation.

Costs are 1 per axial move and sqrt(2) per diagonal move; the octile-distance
heuristic is admissible and consistent for that cost model. Diagonal moves
are disallowed when either adjacent axial cell is blocked (no corner cutting).
Ties are broken by lower flattened cell index so expansion order, and with it
the returned path, is fully deterministic and identical across backends.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

import numpy as np

SQRT2 = math.sqrt(2.0)

# Fixed neighbor scan order; the compiled backend must match it exactly.
_STEPS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def octile(dr: int, dc: int) -> float:
    dr, dc = abs(dr), abs(dc)
    return (dr + dc) + (SQRT2 - 2.0) * min(dr, dc)


def astar_grid(occupied: np.ndarray, start: tuple[int, int], goal: tuple[int, int]):
    """Lowest-cost cell path from start to goal, or None when unreachable."""
    rows, cols = occupied.shape
    occ = occupied
    sr, sc = start
    gr, gc = goal
    if occ[sr, sc] or occ[gr, gc]:
        raise ValueError("start and goal must lie in free cells")
    if start == goal:
        return [start]

    start_idx = sr * cols + sc
    goal_idx = gr * cols + gc
    g_score = {start_idx: 0.0}
    came_from: dict[int, int] = {}
    heap = [(octile(sr - gr, sc - gc), start_idx, 0.0)]

    while heap:
        _, idx, g = heappop(heap)
        if g > g_score.get(idx, math.inf):
            continue
        if idx == goal_idx:
            break
        r, c = divmod(idx, cols)
        for dr, dc in _STEPS:
            nr, nc = r + dr, c + dc
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols or occ[nr, nc]:
                continue
            if dr != 0 and dc != 0 and (occ[r + dr, c] or occ[r, c + dc]):
                continue
            step = SQRT2 if dr != 0 and dc != 0 else 1.0
            cand = g + step
            nidx = nr * cols + nc
            if cand < g_score.get(nidx, math.inf):
                g_score[nidx] = cand
                came_from[nidx] = idx
                heappush(heap, (cand + octile(nr - gr, nc - gc), nidx, cand))
    else:
        return None

    path = [(gr, gc)]
    idx = goal_idx
    while idx != start_idx:
        idx = came_from[idx]
        path.append(divmod(idx, cols))
    path.reverse()
    return path
