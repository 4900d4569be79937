"""Fixed-layout numeric state features for the Q-network.

Five groups: humans, robots, machines, materials, tasks. Entity rows are
[one-hot kind-local id | one-hot current task | one-hot current subtask |
progress | normalized x, y (movable kinds only)]; task rows are
[one-hot task id | one-hot status | completion count / order]. Human and
robot id slots are padded to a fixed capacity so one trained network can be
evaluated across crew-size sweeps. The layout is versioned and embedded in
checkpoints; see ``StateLayout.table()`` for the exact offsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import EntityKind, Scenario, TaskStatus, WorldState

LAYOUT_VERSION = 1

STATUS_ORDER = (TaskStatus.LOCKED, TaskStatus.AVAILABLE, TaskStatus.IN_PROGRESS, TaskStatus.DONE)

DEFAULT_ID_CAPACITY = 4  # covers crew sweeps of 1..4 humans / robots


@dataclass(frozen=True)
class StateLayout:
    version: int
    n_tasks: int
    n_subtasks: int
    human_capacity: int
    robot_capacity: int
    n_machines: int
    n_materials: int
    task_ids: tuple[str, ...]
    subtask_ids: tuple[str, ...]

    @staticmethod
    def for_scenario(scenario: Scenario, id_capacity: int = DEFAULT_ID_CAPACITY) -> "StateLayout":
        return StateLayout(
            version=LAYOUT_VERSION,
            n_tasks=len(scenario.tasks),
            n_subtasks=len(scenario.all_subtasks()),
            human_capacity=max(id_capacity, scenario.n_humans),
            robot_capacity=max(id_capacity, scenario.n_robots),
            n_machines=len(scenario.machine_ids),
            n_materials=len(scenario.material_ids),
            task_ids=tuple(t.id for t in scenario.tasks),
            subtask_ids=tuple(s.id for s in scenario.all_subtasks()),
        )

    def _entity_width(self, id_slots: int, positional: bool) -> int:
        return id_slots + self.n_tasks + self.n_subtasks + 1 + (2 if positional else 0)

    @property
    def group_widths(self) -> dict[str, int]:
        return {
            "humans": self._entity_width(self.human_capacity, True),
            "robots": self._entity_width(self.robot_capacity, True),
            "machines": self._entity_width(max(self.n_machines, 1), False),
            "materials": self._entity_width(max(self.n_materials, 1), False),
            "tasks": self.n_tasks + len(STATUS_ORDER) + 1,
        }

    def table(self) -> dict:
        """Field offsets per group, for documentation and layout freezing."""
        out = {"version": self.version, "groups": {}}
        for group, id_slots, positional in (
            ("humans", self.human_capacity, True),
            ("robots", self.robot_capacity, True),
            ("machines", max(self.n_machines, 1), False),
            ("materials", max(self.n_materials, 1), False),
        ):
            fields = [
                ("local_id_onehot", 0, id_slots),
                ("task_onehot", id_slots, self.n_tasks),
                ("subtask_onehot", id_slots + self.n_tasks, self.n_subtasks),
                ("progress", id_slots + self.n_tasks + self.n_subtasks, 1),
            ]
            if positional:
                fields.append(("position_xy", id_slots + self.n_tasks + self.n_subtasks + 1, 2))
            out["groups"][group] = {
                "width": self.group_widths[group],
                "fields": [{"name": n, "offset": o, "size": s} for n, o, s in fields],
            }
        out["groups"]["tasks"] = {
            "width": self.group_widths["tasks"],
            "fields": [
                {"name": "task_onehot", "offset": 0, "size": self.n_tasks},
                {"name": "status_onehot", "offset": self.n_tasks, "size": len(STATUS_ORDER)},
                {"name": "completion_ratio", "offset": self.n_tasks + len(STATUS_ORDER), "size": 1},
            ],
        }
        return out

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "n_tasks": self.n_tasks,
            "n_subtasks": self.n_subtasks,
            "human_capacity": self.human_capacity,
            "robot_capacity": self.robot_capacity,
            "n_machines": self.n_machines,
            "n_materials": self.n_materials,
            "task_ids": list(self.task_ids),
            "subtask_ids": list(self.subtask_ids),
        }

    @staticmethod
    def from_dict(d: dict) -> "StateLayout":
        d = dict(d)
        d["task_ids"] = tuple(d["task_ids"])
        d["subtask_ids"] = tuple(d["subtask_ids"])
        return StateLayout(**d)

    def compatible_with(self, scenario: Scenario) -> bool:
        """A layout transfers to a scenario when the task set matches and the
        crew fits within the id capacities (order changes are always fine)."""
        return (
            self.task_ids == tuple(t.id for t in scenario.tasks)
            and self.subtask_ids == tuple(s.id for s in scenario.all_subtasks())
            and scenario.n_humans <= self.human_capacity
            and scenario.n_robots <= self.robot_capacity
            and self.n_machines == len(scenario.machine_ids)
            and self.n_materials == len(scenario.material_ids)
        )


class LayoutError(ValueError):
    pass


def encode_state(state: WorldState, scenario: Scenario, layout: StateLayout | None = None) -> dict[str, np.ndarray]:
    """Pure function of (state, scenario, layout); returns one 2-D float array
    per feature group (rows = entities/tasks in scenario order)."""
    layout = layout if layout is not None else StateLayout.for_scenario(scenario)
    if not layout.compatible_with(scenario):
        raise LayoutError("layout is incompatible with this scenario")
    task_index = {tid: i for i, tid in enumerate(layout.task_ids)}
    sub_index = {sid: i for i, sid in enumerate(layout.subtask_ids)}
    widths = layout.group_widths

    groups: dict[str, np.ndarray] = {}
    specs = (
        ("humans", EntityKind.HUMAN, layout.human_capacity, True),
        ("robots", EntityKind.ROBOT, layout.robot_capacity, True),
        ("machines", EntityKind.MACHINE, max(layout.n_machines, 1), False),
        ("materials", EntityKind.MATERIAL, max(layout.n_materials, 1), False),
    )
    for group, kind, id_slots, positional in specs:
        members = state.by_kind(kind)
        arr = np.zeros((len(members), widths[group]), dtype=np.float64)
        for i, entity in enumerate(members):
            arr[i, i] = 1.0
            if entity.current_task is not None:
                arr[i, id_slots + task_index[entity.current_task]] = 1.0
            if entity.current_subtask is not None:
                arr[i, id_slots + layout.n_tasks + sub_index[entity.current_subtask]] = 1.0
            arr[i, id_slots + layout.n_tasks + layout.n_subtasks] = entity.progress
            if positional:
                x, y = entity.position
                arr[i, -2] = x / scenario.world_width
                arr[i, -1] = y / scenario.world_height
        groups[group] = arr

    tasks = np.zeros((layout.n_tasks, widths["tasks"]), dtype=np.float64)
    for i, task in enumerate(scenario.tasks):
        rt = state.task_state[task.id]
        tasks[i, i] = 1.0
        tasks[i, layout.n_tasks + STATUS_ORDER.index(rt.status)] = 1.0
        tasks[i, -1] = rt.completed_count / scenario.order_quantity
    groups["tasks"] = tasks
    return groups
