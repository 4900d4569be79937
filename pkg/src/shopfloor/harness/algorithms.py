"""Registry mapping benchmark algorithm ids to agent configuration flags."""

from __future__ import annotations

from dataclasses import dataclass

from ..agent.policy import ExplorationKind


@dataclass(frozen=True)
class AlgorithmSpec:
    id: str
    trainable: bool = True
    efficient_buffer: bool = True
    reward_modify: bool = True
    dueling: bool = True
    double_dqn: bool = True
    exploration: ExplorationKind = ExplorationKind.EPSILON_GREEDY

    @property
    def noisy(self) -> bool:
        return self.exploration.uses_noise


ALGORITHMS: dict[str, AlgorithmSpec] = {
    spec.id: spec
    for spec in (
        AlgorithmSpec("D3QN", efficient_buffer=False, reward_modify=False),
        AlgorithmSpec("NoModify", reward_modify=False),
        AlgorithmSpec("EDQN1", double_dqn=False),
        AlgorithmSpec("EDQN2", dueling=False),
        AlgorithmSpec("EBQ-G"),
        AlgorithmSpec("EBQ-N", exploration=ExplorationKind.NOISY),
        AlgorithmSpec("EBQ-GN", exploration=ExplorationKind.BOTH),
        AlgorithmSpec("Random", trainable=False),
    )
}


def algorithm(algo_id: str) -> AlgorithmSpec:
    try:
        return ALGORITHMS[algo_id]
    except KeyError:
        raise ValueError(f"unknown algorithm '{algo_id}' (choose from {sorted(ALGORITHMS)})") from None
