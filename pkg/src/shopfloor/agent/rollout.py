"""Generic episode execution: high-level decision -> allocator -> env step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..allocator import AllocatorKind, Unallocatable, allocate
from ..sim.encoding import StateLayout, encode_state
from ..sim.env import ProductionEnv
from ..sim.types import EntityKind


@dataclass
class EpisodeResult:
    makespan: int
    success: bool
    progress: float
    episode_return: float
    total_distance: float
    steps: int
    trace: list[dict] = field(default_factory=list)


def run_episode(
    env: ProductionEnv,
    decide,
    seed: int,
    layout: StateLayout | None = None,
    allocator_kind: AllocatorKind = AllocatorKind.SAP,
    allocator_rng: np.random.Generator | None = None,
    record_trace: bool = False,
    on_transition=None,
) -> EpisodeResult:
    """Run one episode.

    ``decide(features, legal_mask) -> action index`` is the high-level policy.
    ``on_transition(features, action, next_features, reward, done, next_mask)``
    lets a trainer capture transitions without re-encoding states.
    """
    scenario = env.scenario
    layout = layout if layout is not None else StateLayout.for_scenario(scenario)
    state = env.reset(seed)
    features = encode_state(state, scenario, layout)
    mask = env.legal_actions()
    total_reward = 0.0
    steps = 0
    trace: list[dict] = []

    while not env.done:
        action = int(decide(features, mask))
        if not mask[action]:
            raise ValueError(f"policy chose illegal action {action}")
        allocation = None
        if action != scenario.idle_action:
            task = scenario.tasks[action]
            resolved = allocate(task.id, env.state, env.graph, scenario, allocator_kind, allocator_rng)
            if isinstance(resolved, Unallocatable):
                raise RuntimeError(f"legal decision failed to allocate: {resolved.reason}")
            allocation = resolved
        state, reward, done, events = env.step(allocation)
        next_features = encode_state(state, scenario, layout)
        next_mask = env.legal_actions(state)
        total_reward += reward
        steps += 1
        if on_transition is not None:
            on_transition(features, action, next_features, reward, done, next_mask)
        if record_trace:
            trace.append(
                {
                    "tick": state.tick,
                    "action": action,
                    "allocation": (
                        {"task": allocation.task, "human": allocation.human, "robot": allocation.robot}
                        if allocation
                        else None
                    ),
                    "reward": reward,
                    "entities": [
                        {
                            "id": e.id,
                            "task": e.current_task,
                            "subtask": e.current_subtask,
                            "position": list(e.position) if e.position else None,
                            "distance": e.distance_moved,
                        }
                        for e in state.entities
                    ],
                    "events": events,
                }
            )
        features, mask = next_features, next_mask

    final = env.state
    distance = sum(e.distance_moved for e in final.entities if e.kind in (EntityKind.HUMAN, EntityKind.ROBOT))
    return EpisodeResult(
        makespan=final.tick,
        success=final.products_done >= scenario.order_quantity,
        progress=env.progress(),
        episode_return=total_reward,
        total_distance=distance,
        steps=steps,
        trace=trace,
    )


# -- reference high-level policies -------------------------------------------------


def random_policy(rng: np.random.Generator):
    """Uniform over legal actions (the 'Random' high-level baseline)."""

    def decide(features, mask):
        legal = np.flatnonzero(mask)
        return int(legal[rng.integers(len(legal))])

    return decide


def first_legal_policy(idle_action: int):
    """Scripted baseline: start the lowest-index startable task, else idle."""

    def decide(features, mask):
        legal = np.flatnonzero(mask[:idle_action])
        return int(legal[0]) if len(legal) else idle_action

    return decide
