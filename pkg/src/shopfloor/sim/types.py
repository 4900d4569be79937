"""Domain types for the production-line simulator."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from ..spatial.grid import Rect


class EntityKind(enum.Enum):
    HUMAN = "human"
    ROBOT = "robot"
    MACHINE = "machine"
    MATERIAL = "material"


class TaskStatus(enum.Enum):
    LOCKED = "locked"
    AVAILABLE = "available"
    IN_PROGRESS = "in_progress"
    DONE = "done"


# Performer classes a subtask may require (materials never perform work).
PERFORMER_KINDS = (EntityKind.HUMAN, EntityKind.ROBOT, EntityKind.MACHINE)


@dataclass(frozen=True)
class Subtask:
    id: str
    required_class: EntityKind
    duration: int
    location_node: str | None = None
    machine: str | None = None  # explicit workstation binding for machine steps

    def __post_init__(self):
        if self.required_class not in PERFORMER_KINDS:
            raise ValueError(f"subtask {self.id}: materials cannot perform work")
        if self.duration < 1:
            raise ValueError(f"subtask {self.id}: duration must be >= 1 tick")


@dataclass(frozen=True)
class Task:
    id: str
    subtasks: tuple[Subtask, ...]
    dependencies: frozenset[str] = frozenset()
    repeatable: bool = True
    material: str | None = None  # material entity this task processes

    def __post_init__(self):
        if not self.subtasks:
            raise ValueError(f"task {self.id}: subtask sequence must be non-empty")

    @property
    def needs_human(self) -> bool:
        return any(s.required_class is EntityKind.HUMAN for s in self.subtasks)

    @property
    def needs_robot(self) -> bool:
        return any(s.required_class is EntityKind.ROBOT for s in self.subtasks)

    @property
    def area_node(self) -> str | None:
        """The task's working-area node: where its first located subtask runs."""
        for sub in self.subtasks:
            if sub.location_node is not None:
                return sub.location_node
        return None


@dataclass(frozen=True)
class RewardConfig:
    """Per-tick and episode-outcome reward scalars.

    time_penalty is charged every tick; progress_reward fires when a product
    unit completes; goal_reward is +/- on episode success/failure.
    success_scale and failure_penalty shape the episode-end buffer adjustment,
    and duplication is how many copies of each successful-episode transition
    enter the replay buffer.
    """

    time_penalty: float = 0.01
    goal_reward: float = 1.0
    progress_reward: float = 0.1
    success_scale: float = 0.4
    failure_penalty: float = 0.001
    duplication: int = 5
    discount: float = 0.99

    def __post_init__(self):
        for name in ("time_penalty", "goal_reward", "progress_reward", "success_scale", "failure_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.duplication < 1:
            raise ValueError("duplication must be >= 1")
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must lie in (0, 1]")


@dataclass(frozen=True)
class Scenario:
    name: str
    tasks: tuple[Task, ...]
    area_nodes: dict[str, tuple[float, float]]
    obstacles: tuple[Rect, ...]
    world_width: float
    world_height: float
    n_humans: int
    n_robots: int
    machine_ids: tuple[str, ...]
    material_ids: tuple[str, ...]
    human_speed: float = 1.2  # meters per tick
    robot_speed: float = 1.5
    order_quantity: int = 1
    horizon: int = 2000
    reward: RewardConfig = field(default_factory=RewardConfig)
    resolution: float = 0.25

    @property
    def n_actions(self) -> int:
        return len(self.tasks) + 1  # tasks plus the idle action

    @property
    def idle_action(self) -> int:
        return len(self.tasks)

    def task_by_id(self, task_id: str) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def task_index(self, task_id: str) -> int:
        for i, t in enumerate(self.tasks):
            if t.id == task_id:
                return i
        raise KeyError(task_id)

    def all_subtasks(self) -> list[Subtask]:
        return [s for t in self.tasks for s in t.subtasks]


@dataclass
class EntityState:
    id: str
    kind: EntityKind
    current_task: str | None = None
    current_subtask: str | None = None
    progress: float = 0.0
    position: tuple[float, float] | None = None
    busy_until: int | None = None
    route: list[tuple[float, float]] = field(default_factory=list)
    distance_moved: float = 0.0

    def clone(self) -> "EntityState":
        return replace(self, route=list(self.route))

    @property
    def idle(self) -> bool:
        return self.current_task is None


@dataclass
class Execution:
    """Live run of one task: which subtask is active and who does what."""

    subtask_idx: int
    phase: str  # "moving" | "working" | "waiting_machine"
    work_left: int
    human: str | None
    robot: str | None
    machine: str | None = None

    def clone(self) -> "Execution":
        return replace(self)


@dataclass
class TaskRuntime:
    status: TaskStatus
    completed_count: int = 0
    execution: Execution | None = None

    def clone(self) -> "TaskRuntime":
        return TaskRuntime(
            status=self.status,
            completed_count=self.completed_count,
            execution=self.execution.clone() if self.execution else None,
        )


@dataclass
class WorldState:
    tick: int
    entities: list[EntityState]
    task_state: dict[str, TaskRuntime]
    products_done: int
    rng_state: dict | None = None

    def clone(self) -> "WorldState":
        return WorldState(
            tick=self.tick,
            entities=[e.clone() for e in self.entities],
            task_state={k: v.clone() for k, v in self.task_state.items()},
            products_done=self.products_done,
            rng_state=self.rng_state,
        )

    def entity(self, entity_id: str) -> EntityState:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def by_kind(self, kind: EntityKind) -> list[EntityState]:
        return [e for e in self.entities if e.kind is kind]


@dataclass(frozen=True)
class Allocation:
    task: str
    human: str | None = None
    robot: str | None = None
