"""Sum-tree over leaf priorities, vectorized NumPy implementation.

The tree is a complete binary tree stored in one array (leaves padded to the
next power of two). Parents are always recomputed as the sum of their
children, so the root stays consistent with the leaves to rounding error.
``find`` descends all query prefixes through the tree simultaneously.
"""

from __future__ import annotations

import numpy as np


class SumTree:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        n = 1
        depth = 0
        while n < capacity:
            n *= 2
            depth += 1
        self._n_leaves = n
        self._depth = depth
        self._nodes = np.zeros(2 * n - 1, dtype=np.float64)

    @property
    def total(self) -> float:
        return float(self._nodes[0])

    def leaf_values(self) -> np.ndarray:
        return self._nodes[self._n_leaves - 1 : self._n_leaves - 1 + self.capacity].copy()

    def update(self, indices, values) -> None:
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        values = np.atleast_1d(np.asarray(values, dtype=np.float64))
        if np.any((indices < 0) | (indices >= self.capacity)):
            raise IndexError("leaf index out of range")
        nodes = self._nodes
        positions = indices + (self._n_leaves - 1)
        nodes[positions] = values
        for _ in range(self._depth):
            positions = np.unique((positions - 1) // 2)
            nodes[positions] = nodes[2 * positions + 1] + nodes[2 * positions + 2]

    def find(self, prefixes) -> np.ndarray:
        """Map each prefix in [0, total) to the leaf owning that mass."""
        prefixes = np.atleast_1d(np.asarray(prefixes, dtype=np.float64)).copy()
        nodes = self._nodes
        idx = np.zeros(prefixes.shape, dtype=np.int64)
        for _ in range(self._depth):
            left = 2 * idx + 1
            left_sum = nodes[left]
            go_left = prefixes < left_sum
            idx = np.where(go_left, left, left + 1)
            prefixes = np.where(go_left, prefixes, prefixes - left_sum)
        return idx - (self._n_leaves - 1)
