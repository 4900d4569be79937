"""Low-level task allocation: choose which idle human/robot executes a task.

Distances come from the precomputed node graph: an entity is snapped to its
nearest working-area node (straight-line segment) and the node-to-node path
length is read from the graph. Three strategies share that candidate table:
nearest-entity ("SAP"), farthest-entity ("LongestPath", a deliberately bad
baseline), and seeded random choice ("NoSpatial").
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .sim.types import Allocation, EntityKind, Scenario, Task, WorldState
from .spatial.nodegraph import NodeGraph, nearest_free_node


class AllocatorKind(enum.Enum):
    SAP = "SAP"
    NO_SPATIAL = "NoSpatial"
    LONGEST_PATH = "LongestPath"

    @staticmethod
    def parse(name: str) -> "AllocatorKind":
        for kind in AllocatorKind:
            if kind.value == name:
                return kind
        raise ValueError(f"unknown allocator '{name}' (choose from {[k.value for k in AllocatorKind]})")


class AllocatorConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Unallocatable:
    task: str
    reason: str


@dataclass
class CandidateTable:
    """Per-class distances (meters) from each idle entity to the task node."""

    task: str
    node: str
    humans: dict[str, float] = field(default_factory=dict)
    robots: dict[str, float] = field(default_factory=dict)


def candidate_distances(task: Task, state: WorldState, graph: NodeGraph) -> CandidateTable:
    node_id = task.area_node
    if node_id is None or node_id not in graph.nodes:
        raise AllocatorConfigError(f"task '{task.id}' has no working-area node in the graph")
    nodes = [graph.nodes[nid] for nid in graph.node_ids()]
    table = CandidateTable(task=task.id, node=node_id)
    for entity in state.entities:
        if entity.kind not in (EntityKind.HUMAN, EntityKind.ROBOT) or not entity.idle:
            continue
        snap = nearest_free_node(entity.position, nodes)
        hop = graph.length(snap.id, node_id)
        if hop is None:
            continue  # walled off from the task node
        x, y = entity.position
        distance = math.hypot(snap.position[0] - x, snap.position[1] - y) + hop
        (table.humans if entity.kind is EntityKind.HUMAN else table.robots)[entity.id] = distance
    return table


def _entity_sort_key(entity_id: str) -> tuple:
    head = entity_id.rstrip("0123456789")
    tail = entity_id[len(head) :]
    return (head, int(tail) if tail else -1)


def _pick(distances: dict[str, float], kind: AllocatorKind, rng: np.random.Generator | None) -> str:
    # `ordered` is id-sorted, so first-best selection breaks ties by lowest id.
    ordered = sorted(distances.items(), key=lambda kv: _entity_sort_key(kv[0]))
    if kind is AllocatorKind.SAP:
        return min(ordered, key=lambda kv: kv[1])[0]
    if kind is AllocatorKind.LONGEST_PATH:
        return max(ordered, key=lambda kv: kv[1])[0]
    assert rng is not None, "NoSpatial allocation needs a random stream"
    return ordered[int(rng.integers(len(ordered)))][0]


def allocate(
    decision: str,
    state: WorldState,
    graph: NodeGraph,
    scenario: Scenario,
    kind: AllocatorKind = AllocatorKind.SAP,
    rng: np.random.Generator | None = None,
) -> Allocation | Unallocatable:
    """Resolve a high-level task decision into concrete entities.

    Requires the decision to be legal at issue time; returns ``Unallocatable``
    when a required entity class has no idle (and connected) member.
    """
    task = scenario.task_by_id(decision)
    table = candidate_distances(task, state, graph)
    human = robot = None
    if task.needs_human:
        if not table.humans:
            return Unallocatable(task=decision, reason="no idle human can reach the task node")
        human = _pick(table.humans, kind, rng)
    if task.needs_robot:
        if not table.robots:
            return Unallocatable(task=decision, reason="no idle robot can reach the task node")
        robot = _pick(table.robots, kind, rng)
    return Allocation(task=decision, human=human, robot=robot)
