"""Action selection for the high-level agent."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..neural.network import QNetwork


class ExplorationKind(enum.Enum):
    EPSILON_GREEDY = "greedy"
    NOISY = "noisy"
    BOTH = "both"

    @property
    def uses_epsilon(self) -> bool:
        return self in (ExplorationKind.EPSILON_GREEDY, ExplorationKind.BOTH)

    @property
    def uses_noise(self) -> bool:
        return self in (ExplorationKind.NOISY, ExplorationKind.BOTH)


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 1.0
    end: float = 0.05
    decay_steps: int = 10_000  # environment steps to anneal over

    def at(self, step: int) -> float:
        if self.decay_steps <= 0 or step >= self.decay_steps:
            return self.end
        frac = step / self.decay_steps
        return self.start + (self.end - self.start) * frac


def masked_argmax(q_values: np.ndarray, legal_mask: np.ndarray) -> int:
    """Highest-value legal action; illegal entries can never win. Ties go to
    the lowest action index."""
    masked = np.where(legal_mask, q_values, -np.inf)
    return int(np.argmax(masked))


def select_action(
    net: QNetwork,
    features: dict[str, np.ndarray],
    legal_mask: np.ndarray,
    strategy: ExplorationKind,
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """One training-time decision. Noisy strategies resample layer noise
    before the forward; epsilon strategies explore uniformly over legal
    actions. Greedy evaluation should call ``greedy_action`` instead."""
    if not legal_mask.any():
        raise ValueError("legal mask has no legal action")
    if strategy.uses_noise:
        net.resample_noise(rng)
    if strategy.uses_epsilon and rng.random() < epsilon:
        legal = np.flatnonzero(legal_mask)
        return int(legal[rng.integers(len(legal))])
    return masked_argmax(net.q_values(features), legal_mask)


def greedy_action(net: QNetwork, features: dict[str, np.ndarray], legal_mask: np.ndarray) -> int:
    """Deterministic evaluation policy: no noise, no epsilon."""
    if not legal_mask.any():
        raise ValueError("legal mask has no legal action")
    return masked_argmax(net.q_values(features), legal_mask)
