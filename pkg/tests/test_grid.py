import numpy as np
import pytest

from shopfloor.spatial.grid import GridError, Rect, rasterize


def test_empty_world_all_free():
    grid = rasterize(10.0, 10.0, [], 1.0)
    assert grid.width == 10 and grid.height == 10
    assert not grid.cells.any()
    assert len(grid.free_cells()) == 100


def test_exactly_aligned_obstacle_occupies_one_cell():
    grid = rasterize(4.0, 4.0, [Rect(1.0, 2.0, 2.0, 3.0)], 1.0)
    assert grid.cells.sum() == 1
    assert grid.cells[2, 1]


def test_partial_overlap_is_conservative():
    grid = rasterize(4.0, 4.0, [Rect(0.5, 0.5, 1.5, 1.5)], 1.0)
    # covers parts of four cells -> all four occupied
    assert grid.cells.sum() == 4
    assert grid.cells[0, 0] and grid.cells[0, 1] and grid.cells[1, 0] and grid.cells[1, 1]


def test_boundary_touch_does_not_occupy():
    # Obstacle exactly on the cell boundary: the neighbor shares only an edge.
    grid = rasterize(4.0, 4.0, [Rect(1.0, 1.0, 2.0, 2.0)], 1.0)
    assert not grid.cells[1, 2] and not grid.cells[2, 1]
    assert grid.cells[1, 1]


def test_world_roundtrip_within_one_cell():
    grid = rasterize(7.3, 5.1, [], 0.25)
    for x, y in [(0.01, 0.01), (3.33, 2.2), (7.2, 5.0)]:
        row, col = grid.world_to_cell(x, y)
        cx, cy = grid.cell_center(row, col)
        assert abs(cx - x) <= grid.resolution and abs(cy - y) <= grid.resolution


def test_out_of_bounds_position_rejected():
    grid = rasterize(4.0, 4.0, [], 1.0)
    with pytest.raises(GridError):
        grid.world_to_cell(5.0, 1.0)


def test_cell_limit_enforced():
    with pytest.raises(GridError, match="cell limit"):
        rasterize(10_000.0, 10_000.0, [], 0.01)


def test_obstacle_outside_world_rejected():
    with pytest.raises(GridError, match="outside"):
        rasterize(4.0, 4.0, [Rect(3.0, 3.0, 5.0, 4.0)], 1.0)


def test_degenerate_rect_rejected():
    with pytest.raises(GridError):
        Rect(1.0, 1.0, 1.0, 2.0)


def test_rasterize_deterministic():
    obstacles = [Rect(0.3, 0.4, 2.7, 1.9), Rect(2.0, 2.0, 3.5, 3.5)]
    a = rasterize(5.0, 5.0, obstacles, 0.25)
    b = rasterize(5.0, 5.0, obstacles, 0.25)
    assert np.array_equal(a.cells, b.cells)
    assert a.content_hash() == b.content_hash()


def test_content_hash_changes_with_cells():
    a = rasterize(5.0, 5.0, [], 0.25)
    b = rasterize(5.0, 5.0, [Rect(1.0, 1.0, 2.0, 2.0)], 0.25)
    assert a.content_hash() != b.content_hash()
