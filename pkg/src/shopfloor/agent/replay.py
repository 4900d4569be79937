"""Experience storage: episode-end processing and prioritized replay.

Transitions collected during an episode are held in a temporary list. When
the episode finishes they are adjusted by an outcome-dependent reward offset
(positive and shrinking with makespan on success, a small penalty on failure)
and successful episodes are additionally pushed in multiple copies, which is
what makes sparse successes dominate the buffer early in training. Priorities
live in a sum-tree so sampling proportional to priority^omega stays O(log n).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .._kernels import SumTree
from ..sim.types import RewardConfig


@dataclass(frozen=True)
class Transition:
    state: dict[str, np.ndarray]
    action: int
    next_state: dict[str, np.ndarray]
    reward: float
    terminal: bool
    legal_next: np.ndarray  # legality mask at next_state, used to mask bootstraps


class BufferError(RuntimeError):
    pass


def episode_outcome_bonus(success: bool, makespan: int, horizon: int, reward: RewardConfig) -> float:
    """Reward offset applied to every transition of a finished episode:
    success_scale * (H - makespan) / makespan on success, -failure_penalty on
    failure. Success exactly at the horizon earns a zero offset."""
    if success:
        return reward.success_scale * (horizon - makespan) / makespan
    return -reward.failure_penalty


def episode_end_process(
    transitions: list[Transition],
    success: bool,
    makespan: int,
    horizon: int,
    reward: RewardConfig,
    efficient_buffer: bool = True,
    reward_modify: bool = True,
) -> list[Transition]:
    """Turn a finished episode's temporary buffer into replay-ready transitions.

    With the efficient buffer disabled everything passes through unchanged.
    Otherwise rewards get the outcome offset (unless reward_modify is off) and
    successful episodes emit ``duplication`` adjacent copies per transition,
    preserving episode order.
    """
    if transitions and not transitions[-1].terminal:
        raise BufferError("episode-end processing called before the episode finished")
    if not efficient_buffer:
        return list(transitions)
    offset = episode_outcome_bonus(success, makespan, horizon, reward) if reward_modify else 0.0
    n_repeat = reward.duplication if success else 1
    out: list[Transition] = []
    for tr in transitions:
        adjusted = replace(tr, reward=tr.reward + offset) if offset != 0.0 else tr
        out.extend([adjusted] * n_repeat)
    return out


class PrioritizedReplay:
    """Ring buffer + sum-tree of priorities.

    Raw priorities are floored at ``min_priority`` and raised to
    ``priority_exponent`` before entering the tree, so sampling follows
    p^omega / sum(p^omega). New transitions enter at the maximum raw priority
    seen so far (1.0 initially); the oldest entry is evicted when full.
    """

    def __init__(self, capacity: int, priority_exponent: float = 0.6, min_priority: float = 1e-4):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.priority_exponent = priority_exponent
        self.min_priority = min_priority
        self._tree = SumTree(capacity)
        self._storage: list[Transition | None] = [None] * capacity
        self._raw = np.zeros(capacity, dtype=np.float64)
        self._pos = 0
        self._size = 0
        self.max_raw = 1.0

    def __len__(self) -> int:
        return self._size

    @property
    def tree_total(self) -> float:
        return self._tree.total

    def _leaf(self, raw: np.ndarray) -> np.ndarray:
        return np.maximum(raw, self.min_priority) ** self.priority_exponent

    def push(self, transition: Transition) -> None:
        idx = self._pos
        self._storage[idx] = transition
        self._raw[idx] = self.max_raw
        self._tree.update(np.array([idx]), self._leaf(np.array([self.max_raw])))
        self._pos = (self._pos + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def priority(self, index: int) -> float:
        return float(self._raw[index])

    def leaf_values(self) -> np.ndarray:
        return self._tree.leaf_values()

    def set_priorities(self, indices, raw_priorities) -> None:
        """Set raw priorities directly (also the train-step update path)."""
        indices = np.asarray(indices, dtype=np.int64)
        raw = np.asarray(raw_priorities, dtype=np.float64)
        if np.any(raw < 0):
            raise ValueError("priorities must be non-negative")
        self._raw[indices] = raw
        self._tree.update(indices, self._leaf(raw))
        if raw.size:
            self.max_raw = max(self.max_raw, float(raw.max()))

    update_priorities = set_priorities

    def sample(
        self, batch_size: int, beta: float, rng: np.random.Generator
    ) -> tuple[list[Transition], np.ndarray, np.ndarray]:
        """Stratified proportional sampling plus importance weights
        w_i = (N * P(i))^-beta, normalized by the batch maximum."""
        if self._size < batch_size:
            raise BufferError(f"buffer holds {self._size} transitions, need {batch_size}")
        total = self._tree.total
        points = (np.arange(batch_size) + rng.random(batch_size)) / batch_size * total
        points = np.minimum(points, np.nextafter(total, 0.0))
        indices = self._tree.find(points)
        probs = self._leaf(self._raw[indices]) / total
        weights = (self._size * probs) ** -beta
        weights /= weights.max()
        batch = [self._storage[i] for i in indices]
        return batch, indices, weights
