"""Occupancy grid construction from axis-aligned rectangular obstacles."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

MAX_CELLS = 10**7


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in world meters, (x1, y1) lower-left corner."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise GridError(f"degenerate rectangle {self!r}")


@dataclass(frozen=True)
class GridMap:
    """Immutable occupancy grid. cells[row, col] is True when occupied;
    row indexes y and col indexes x, origin at world (0, 0)."""

    resolution: float
    width: int  # columns
    height: int  # rows
    cells: np.ndarray

    def __post_init__(self):
        self.cells.setflags(write=False)

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        col = int(np.floor(x / self.resolution))
        row = int(np.floor(y / self.resolution))
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise GridError(f"position ({x}, {y}) outside the world")
        return row, col

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) * self.resolution, (row + 0.5) * self.resolution)

    def is_free_world(self, x: float, y: float) -> bool:
        row, col = self.world_to_cell(x, y)
        return not bool(self.cells[row, col])

    def free_cells(self) -> np.ndarray:
        """(k, 2) array of free (row, col) pairs in row-major order."""
        rows, cols = np.nonzero(~self.cells)
        return np.stack([rows, cols], axis=1)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.resolution!r}:{self.width}:{self.height}:".encode())
        h.update(np.packbits(self.cells).tobytes())
        return h.hexdigest()


def rasterize(world_width: float, world_height: float, obstacles: list[Rect], resolution: float) -> GridMap:
    """Grid the world; a cell is occupied iff it overlaps any obstacle with
    positive area (conservative: partial coverage marks the whole cell)."""
    if resolution <= 0:
        raise GridError("resolution must be positive")
    cols = int(np.ceil(world_width / resolution - 1e-9))
    rows = int(np.ceil(world_height / resolution - 1e-9))
    if rows < 1 or cols < 1:
        raise GridError("world too small for this resolution")
    if rows * cols > MAX_CELLS:
        raise GridError(f"grid of {rows * cols} cells exceeds the {MAX_CELLS} cell limit")
    cells = np.zeros((rows, cols), dtype=bool)
    for rect in obstacles:
        if rect.x1 < -1e-9 or rect.y1 < -1e-9 or rect.x2 > world_width + 1e-9 or rect.y2 > world_height + 1e-9:
            raise GridError(f"obstacle {rect} extends outside the {world_width}x{world_height} world")
        col_lo = max(0, int(np.floor(rect.x1 / resolution)))
        col_hi = min(cols - 1, int(np.ceil(rect.x2 / resolution)))
        row_lo = max(0, int(np.floor(rect.y1 / resolution)))
        row_hi = min(rows - 1, int(np.ceil(rect.y2 / resolution)))
        for row in range(row_lo, row_hi + 1):
            y_lo, y_hi = row * resolution, (row + 1) * resolution
            if not (y_lo < rect.y2 and y_hi > rect.y1):
                continue
            for col in range(col_lo, col_hi + 1):
                x_lo, x_hi = col * resolution, (col + 1) * resolution
                if x_lo < rect.x2 and x_hi > rect.x1:
                    cells[row, col] = True
    return GridMap(resolution=resolution, width=cols, height=rows, cells=cells)
