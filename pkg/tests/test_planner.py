import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shopfloor.spatial.grid import GridError, GridMap, Rect, rasterize
from shopfloor.spatial.planner import SQRT2, plan_path

from .oracles import dijkstra_grid_cost


def test_start_equals_goal_single_waypoint():
    grid = rasterize(5.0, 5.0, [], 1.0)
    path = plan_path(grid, (2.5, 2.5), (2.5, 2.5))
    assert len(path.waypoints) == 1
    assert path.length == 0.0


def test_axial_line_length():
    grid = rasterize(8.0, 3.0, [], 1.0)
    path = plan_path(grid, (0.5, 1.5), (5.5, 1.5))
    assert path.length == pytest.approx(5.0)
    assert path.n_diagonal == 0 and path.n_axial == 5


def test_diagonal_length_scaled_by_resolution():
    grid = rasterize(4.0, 4.0, [], 0.5)
    path = plan_path(grid, (0.25, 0.25), (1.75, 1.75))
    assert path.n_axial == 0 and path.n_diagonal == 3
    assert path.length == pytest.approx(3 * SQRT2 * 0.5)


def test_occupied_start_raises():
    grid = rasterize(4.0, 4.0, [Rect(0.0, 0.0, 1.0, 1.0)], 1.0)
    with pytest.raises(GridError, match="start"):
        plan_path(grid, (0.5, 0.5), (3.5, 3.5))


def test_unreachable_returns_none():
    grid = rasterize(5.0, 5.0, [Rect(2.0, 0.0, 3.0, 5.0)], 1.0)
    assert plan_path(grid, (0.5, 2.5), (4.5, 2.5)) is None


def test_waypoints_are_adjacent_free_cell_centers():
    grid = rasterize(10.0, 10.0, [Rect(3.0, 3.0, 7.0, 7.0)], 0.5)
    path = plan_path(grid, (1.25, 1.25), (8.75, 8.75))
    for (x0, y0), (x1, y1) in zip(path.waypoints, path.waypoints[1:]):
        dr = round(abs(y1 - y0) / grid.resolution)
        dc = round(abs(x1 - x0) / grid.resolution)
        assert (dr, dc) in {(0, 1), (1, 0), (1, 1)}
    for x, y in path.waypoints:
        assert grid.is_free_world(x, y)


def _random_instances(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        cells = (rng.random((20, 20)) < 0.25)
        free = np.argwhere(~cells)
        s, g = free[rng.choice(len(free), size=2, replace=False)]
        yield cells, tuple(s), tuple(g)


def test_cost_equals_dijkstra_on_random_grids():
    """200 seeded 20x20 instances: grid-search cost must equal the
    uniform-cost oracle wherever a route exists."""
    checked = 0
    for cells, start, goal in _random_instances(seed=2024, count=200):
        grid = GridMap(resolution=1.0, width=20, height=20, cells=cells)
        sxy = grid.cell_center(*start)
        gxy = grid.cell_center(*goal)
        path = plan_path(grid, sxy, gxy)
        oracle = dijkstra_grid_cost(cells, start, goal)
        if oracle is None:
            assert path is None
        else:
            assert path is not None
            cost = path.n_axial + path.n_diagonal * SQRT2
            assert cost == pytest.approx(oracle, abs=1e-9)
            checked += 1
    assert checked > 100  # most pairs should be solvable at this density


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_octile_heuristic_admissible(seed):
    rng = np.random.default_rng(seed)
    cells = (rng.random((12, 12)) < 0.2)
    free = np.argwhere(~cells)
    if len(free) < 2:
        return
    s, g = free[rng.choice(len(free), size=2, replace=False)]
    oracle = dijkstra_grid_cost(cells, tuple(s), tuple(g))
    if oracle is None:
        return
    dr, dc = abs(s[0] - g[0]), abs(s[1] - g[1])
    octile = (dr + dc) + (SQRT2 - 2.0) * min(dr, dc)
    assert octile <= oracle + 1e-9
