"""Discrete-event production environment.

One step = one tick. The caller (the high-level agent via the allocator) may
start at most one task per tick by passing an Allocation; the environment then
advances every in-progress task: performers travel to their working-area
nodes along node-graph routes, work off subtask durations, claim machines,
and complete tasks, re-arming repeatable tasks after each finished product
unit. Rewards decompose into a per-tick time penalty, a per-product progress
bonus, and a terminal goal bonus/penalty.
"""

from __future__ import annotations

import math

import numpy as np

from ..spatial.grid import GridMap
from ..spatial.nodegraph import NodeGraph, nearest_free_node
from .scenario import scenario_graph, scenario_grid
from .types import (
    Allocation,
    EntityKind,
    EntityState,
    Execution,
    RewardConfig,
    Scenario,
    Task,
    TaskStatus,
    TaskRuntime,
    WorldState,
)


class SimError(RuntimeError):
    pass


class AllocationError(SimError):
    """Raised for allocations that violate the issue-time contract; the
    environment is left unchanged."""


def compute_reward(
    prev: WorldState,
    new: WorldState,
    config: RewardConfig,
    horizon: int,
    order_quantity: int,
) -> float:
    """Per-tick reward: time penalty, plus progress bonus when a product unit
    finished, plus the terminal goal term. Completing the order exactly at the
    horizon counts as in-time success."""
    reward = -config.time_penalty
    if new.products_done > prev.products_done:
        reward += config.progress_reward
    if new.products_done >= order_quantity and prev.products_done < order_quantity:
        reward += config.goal_reward
    elif new.tick >= horizon and new.products_done < order_quantity:
        reward -= config.goal_reward
    return reward


class ProductionEnv:
    def __init__(
        self,
        scenario: Scenario,
        grid: GridMap | None = None,
        graph: NodeGraph | None = None,
        validate: bool = True,
    ):
        self.scenario = scenario
        self.grid = grid if grid is not None else scenario_grid(scenario)
        self.graph = graph if graph is not None else scenario_graph(scenario, self.grid)
        if self.graph.grid_hash and self.graph.grid_hash != self.grid.content_hash():
            raise SimError("node graph was built on a different occupancy grid")
        self.validate = validate
        self._nodes = [self.graph.nodes[nid] for nid in self.graph.node_ids()]
        self._free_cells = self.grid.free_cells()
        self._state: WorldState | None = None
        self._done = False

    # -- lifecycle ---------------------------------------------------------------

    def reset(self, seed: int) -> WorldState:
        rng = np.random.default_rng(seed)
        entities: list[EntityState] = []
        for i in range(self.scenario.n_humans):
            entities.append(EntityState(id=f"h{i}", kind=EntityKind.HUMAN, position=self._draw_position(rng)))
        for i in range(self.scenario.n_robots):
            entities.append(EntityState(id=f"r{i}", kind=EntityKind.ROBOT, position=self._draw_position(rng)))
        for mid in self.scenario.machine_ids:
            entities.append(EntityState(id=mid, kind=EntityKind.MACHINE))
        for mid in self.scenario.material_ids:
            entities.append(EntityState(id=mid, kind=EntityKind.MATERIAL))
        task_state = {t.id: TaskRuntime(status=TaskStatus.LOCKED) for t in self.scenario.tasks}
        self._state = WorldState(
            tick=0,
            entities=entities,
            task_state=task_state,
            products_done=0,
            rng_state=rng.bit_generator.state,
        )
        self._done = False
        self._refresh_statuses()
        if self.validate:
            self._check_invariants()
        return self._state.clone()

    def _draw_position(self, rng: np.random.Generator) -> tuple[float, float]:
        row, col = self._free_cells[int(rng.integers(len(self._free_cells)))]
        return self.grid.cell_center(int(row), int(col))

    @property
    def state(self) -> WorldState:
        if self._state is None:
            raise SimError("reset() must be called first")
        return self._state

    @property
    def done(self) -> bool:
        return self._done

    # -- queries -----------------------------------------------------------------

    def legal_actions(self, state: WorldState | None = None) -> np.ndarray:
        """Boolean mask over task actions plus the always-legal idle action."""
        state = state if state is not None else self.state
        mask = np.zeros(self.scenario.n_actions, dtype=bool)
        idle_humans = any(e.idle for e in state.entities if e.kind is EntityKind.HUMAN)
        idle_robots = any(e.idle for e in state.entities if e.kind is EntityKind.ROBOT)
        for i, task in enumerate(self.scenario.tasks):
            if state.task_state[task.id].status is not TaskStatus.AVAILABLE:
                continue
            if task.needs_human and not idle_humans:
                continue
            if task.needs_robot and not idle_robots:
                continue
            mask[i] = True
        mask[self.scenario.idle_action] = True
        return mask

    def progress(self, state: WorldState | None = None) -> float:
        """Completed products plus uniform fractional credit for the unit in
        flight; 0 at reset, 1 exactly on success."""
        state = state if state is not None else self.state
        order = self.scenario.order_quantity
        if state.products_done >= order:
            return 1.0
        unit_tasks = done = 0
        for task in self.scenario.tasks:
            rt = state.task_state[task.id]
            if task.repeatable:
                unit_tasks += 1
                done += 1 if rt.completed_count >= state.products_done + 1 else 0
            elif rt.completed_count < 1 or state.products_done == 0:
                unit_tasks += 1
                done += rt.completed_count
        fraction = (done / unit_tasks) if unit_tasks else 0.0
        return state.products_done / order + fraction / order

    # -- stepping ----------------------------------------------------------------

    def step(self, allocation: Allocation | None) -> tuple[WorldState, float, bool, list[dict]]:
        if self._state is None:
            raise SimError("reset() must be called first")
        if self._done:
            raise SimError("episode finished; call reset()")
        state = self._state
        events: list[dict] = []
        if allocation is not None:
            self._apply_allocation(allocation, events)

        prev_products = state.products_done
        state.tick += 1
        for task in self.scenario.tasks:
            rt = state.task_state[task.id]
            if rt.execution is not None:
                self._advance_task(task, rt, events)
        self._settle_units(events)

        reward = -self.scenario.reward.time_penalty
        if state.products_done > prev_products:
            reward += self.scenario.reward.progress_reward
        success = state.products_done >= self.scenario.order_quantity
        if success and prev_products < self.scenario.order_quantity:
            reward += self.scenario.reward.goal_reward
        elif state.tick >= self.scenario.horizon and not success:
            reward -= self.scenario.reward.goal_reward
        self._done = success or state.tick >= self.scenario.horizon

        if self.validate:
            self._check_invariants()
        return state.clone(), reward, self._done, events

    # -- allocation --------------------------------------------------------------

    def _apply_allocation(self, allocation: Allocation, events: list[dict]) -> None:
        state = self._state
        try:
            task = self.scenario.task_by_id(allocation.task)
        except KeyError:
            raise AllocationError(f"unknown task '{allocation.task}'") from None
        rt = state.task_state[task.id]
        if rt.status is not TaskStatus.AVAILABLE:
            raise AllocationError(f"task '{task.id}' is {rt.status.value}, not available")
        if task.needs_human != (allocation.human is not None):
            raise AllocationError(f"task '{task.id}' needs_human={task.needs_human} but allocation says otherwise")
        if task.needs_robot != (allocation.robot is not None):
            raise AllocationError(f"task '{task.id}' needs_robot={task.needs_robot} but allocation says otherwise")
        chosen: list[EntityState] = []
        for entity_id, kind in ((allocation.human, EntityKind.HUMAN), (allocation.robot, EntityKind.ROBOT)):
            if entity_id is None:
                continue
            try:
                entity = state.entity(entity_id)
            except KeyError:
                raise AllocationError(f"unknown entity '{entity_id}'") from None
            if entity.kind is not kind:
                raise AllocationError(f"entity '{entity_id}' is a {entity.kind.value}, expected {kind.value}")
            if not entity.idle:
                raise AllocationError(f"entity '{entity_id}' is busy with '{entity.current_task}'")
            chosen.append(entity)

        for entity in chosen:
            entity.current_task = task.id
            entity.progress = 0.0
        rt.execution = Execution(
            subtask_idx=0,
            phase="pending",
            work_left=task.subtasks[0].duration,
            human=allocation.human,
            robot=allocation.robot,
        )
        rt.status = TaskStatus.IN_PROGRESS
        if task.material is not None:
            mat = state.entity(task.material)
            mat.current_task = task.id
        self._start_subtask(task, rt, 0, events)
        events.append({"type": "allocated", "task": task.id, "human": allocation.human, "robot": allocation.robot})

    # -- task machinery ------------------------------------------------------------

    def _performer_id(self, task: Task, execution: Execution) -> str | None:
        sub = task.subtasks[execution.subtask_idx]
        if sub.required_class is EntityKind.HUMAN:
            return execution.human
        if sub.required_class is EntityKind.ROBOT:
            return execution.robot
        return execution.machine

    def _start_subtask(self, task: Task, rt: TaskRuntime, idx: int, events: list[dict]) -> None:
        state = self._state
        execution = rt.execution
        sub = task.subtasks[idx]
        execution.subtask_idx = idx
        execution.work_left = sub.duration
        execution.machine = None
        if sub.required_class is EntityKind.MACHINE:
            machine = self._claim_machine(task, sub)
            if machine is None:
                execution.phase = "waiting_machine"
            else:
                execution.machine = machine.id
                execution.phase = "working"
                machine.busy_until = state.tick + sub.duration
                events.append({"type": "subtask_started", "task": task.id, "subtask": sub.id, "entity": machine.id})
            return
        performer = state.entity(execution.human if sub.required_class is EntityKind.HUMAN else execution.robot)
        performer.current_subtask = sub.id
        route = self._route_to(performer, sub.location_node) if sub.location_node else []
        performer.route = route
        if route:
            execution.phase = "moving"
        else:
            execution.phase = "working"
            performer.busy_until = state.tick + sub.duration
        events.append({"type": "subtask_started", "task": task.id, "subtask": sub.id, "entity": performer.id})

    def _claim_machine(self, task: Task, sub) -> EntityState | None:
        state = self._state
        if sub.machine is not None:
            machine = state.entity(sub.machine)
            if not machine.idle:
                return None
        else:
            idle = [e for e in state.entities if e.kind is EntityKind.MACHINE and e.idle]
            if not idle:
                return None
            machine = min(idle, key=lambda e: e.id)
        machine.current_task = task.id
        machine.current_subtask = sub.id
        machine.progress = 0.0
        return machine

    def _route_to(self, entity: EntityState, node_id: str) -> list[tuple[float, float]]:
        """Snap to the nearest graph node, then follow the precomputed path."""
        target = self.graph.nodes[node_id]
        if entity.position == target.position:
            return []
        snap = nearest_free_node(entity.position, self._nodes)
        route: list[tuple[float, float]] = []
        if entity.position != snap.position:
            route.append(snap.position)
        if snap.id != node_id:
            path = self.graph.path(snap.id, node_id)
            if path is None:
                raise SimError(f"no route from node '{snap.id}' to '{node_id}'")
            route.extend(path.waypoints)
        if not route or route[-1] != target.position:
            route.append(target.position)
        return route

    def _advance_task(self, task: Task, rt: TaskRuntime, events: list[dict]) -> None:
        state = self._state
        execution = rt.execution
        sub = task.subtasks[execution.subtask_idx]
        if execution.phase == "moving":
            performer = state.entity(self._performer_id(task, execution))
            self._move(performer)
            if not performer.route:
                execution.phase = "working"
                performer.busy_until = state.tick + execution.work_left
            self._mirror_progress(task, rt)
            return
        if execution.phase == "waiting_machine":
            machine = self._claim_machine(task, sub)
            if machine is not None:
                execution.machine = machine.id
                execution.phase = "working"
                machine.busy_until = state.tick + execution.work_left
                events.append({"type": "subtask_started", "task": task.id, "subtask": sub.id, "entity": machine.id})
            return
        # working
        execution.work_left -= 1
        performer_id = self._performer_id(task, execution)
        if execution.work_left > 0:
            self._mirror_progress(task, rt)
            return
        events.append({"type": "subtask_done", "task": task.id, "subtask": sub.id, "entity": performer_id})
        if sub.required_class is EntityKind.MACHINE:
            self._release_machine(execution)
        else:
            performer = state.entity(performer_id)
            performer.current_subtask = None
            performer.busy_until = None
        if execution.subtask_idx + 1 < len(task.subtasks):
            self._start_subtask(task, rt, execution.subtask_idx + 1, events)
            self._mirror_progress(task, rt)
        else:
            self._complete_task(task, rt, events)

    def _move(self, entity: EntityState) -> None:
        speed = self.scenario.human_speed if entity.kind is EntityKind.HUMAN else self.scenario.robot_speed
        budget = speed
        x, y = entity.position
        while budget > 1e-12 and entity.route:
            tx, ty = entity.route[0]
            seg = math.hypot(tx - x, ty - y)
            if seg <= budget:
                x, y = tx, ty
                entity.route.pop(0)
                budget -= seg
                entity.distance_moved += seg
            else:
                frac = budget / seg
                x += (tx - x) * frac
                y += (ty - y) * frac
                entity.distance_moved += budget
                budget = 0.0
        entity.position = (x, y)

    def _release_machine(self, execution: Execution) -> None:
        if execution.machine is None:
            return
        machine = self._state.entity(execution.machine)
        machine.current_task = None
        machine.current_subtask = None
        machine.progress = 0.0
        machine.busy_until = None
        execution.machine = None

    def _task_fraction(self, task: Task, execution: Execution) -> float:
        sub = task.subtasks[execution.subtask_idx]
        worked = sub.duration - execution.work_left if execution.phase == "working" else 0
        return (execution.subtask_idx + worked / sub.duration) / len(task.subtasks)

    def _mirror_progress(self, task: Task, rt: TaskRuntime) -> None:
        state = self._state
        execution = rt.execution
        fraction = self._task_fraction(task, execution)
        for entity_id in (execution.human, execution.robot):
            if entity_id is not None:
                state.entity(entity_id).progress = fraction
        if execution.machine is not None:
            sub = task.subtasks[execution.subtask_idx]
            machine = state.entity(execution.machine)
            machine.progress = (sub.duration - execution.work_left) / sub.duration if execution.phase == "working" else 0.0
        if task.material is not None:
            mat = state.entity(task.material)
            mat.current_task = task.id
            mat.current_subtask = task.subtasks[execution.subtask_idx].id
            mat.progress = fraction

    def _complete_task(self, task: Task, rt: TaskRuntime, events: list[dict]) -> None:
        state = self._state
        execution = rt.execution
        for entity_id in (execution.human, execution.robot):
            if entity_id is not None:
                entity = state.entity(entity_id)
                entity.current_task = None
                entity.current_subtask = None
                entity.progress = 0.0
                entity.busy_until = None
                entity.route = []
        if task.material is not None:
            mat = state.entity(task.material)
            mat.current_task = None
            mat.current_subtask = None
            mat.progress = 0.0
        rt.execution = None
        rt.completed_count += 1
        events.append({"type": "task_done", "task": task.id, "count": rt.completed_count})
        self._refresh_statuses()

    def _settle_units(self, events: list[dict]) -> None:
        """Promote a finished product unit and re-arm repeatable tasks."""
        state = self._state
        if state.products_done >= self.scenario.order_quantity:
            return
        for task in self.scenario.tasks:
            rt = state.task_state[task.id]
            needed = state.products_done + 1 if task.repeatable else 1
            if rt.completed_count < needed:
                return
        state.products_done += 1
        events.append({"type": "product_done", "products_done": state.products_done})
        self._refresh_statuses()

    def _deps_done(self, task: Task, state: WorldState) -> bool:
        for dep_id in task.dependencies:
            dep = self.scenario.task_by_id(dep_id)
            needed = state.products_done + 1 if dep.repeatable else 1
            if state.task_state[dep_id].completed_count < needed:
                return False
        return True

    def _refresh_statuses(self) -> None:
        state = self._state
        order = self.scenario.order_quantity
        for task in self.scenario.tasks:
            rt = state.task_state[task.id]
            if rt.execution is not None:
                rt.status = TaskStatus.IN_PROGRESS
            elif task.repeatable:
                if state.products_done >= order or rt.completed_count >= state.products_done + 1:
                    rt.status = TaskStatus.DONE
                else:
                    rt.status = TaskStatus.AVAILABLE if self._deps_done(task, state) else TaskStatus.LOCKED
            else:
                if rt.completed_count >= 1:
                    rt.status = TaskStatus.DONE
                else:
                    rt.status = TaskStatus.AVAILABLE if self._deps_done(task, state) else TaskStatus.LOCKED

    # -- invariants (test builds) ----------------------------------------------------

    def _check_invariants(self) -> None:
        state = self._state
        scenario = self.scenario
        assert state.products_done <= scenario.order_quantity
        assert state.tick <= scenario.horizon
        for entity in state.entities:
            assert 0.0 <= entity.progress <= 1.0 + 1e-9, f"{entity.id} progress {entity.progress}"
            has_position = entity.position is not None
            movable = entity.kind in (EntityKind.HUMAN, EntityKind.ROBOT)
            assert has_position == movable, f"{entity.id} position/kind mismatch"
            if entity.current_subtask is not None:
                assert entity.current_task is not None
        working = {EntityKind.HUMAN: 0, EntityKind.ROBOT: 0, EntityKind.MACHINE: 0}
        for task in scenario.tasks:
            rt = state.task_state[task.id]
            if rt.execution is None:
                continue
            assert self._deps_done(task, state), f"task {task.id} running with unmet dependencies"
            sub = task.subtasks[rt.execution.subtask_idx]
            if rt.execution.phase == "working":
                working[sub.required_class] += 1
        for kind in (EntityKind.HUMAN, EntityKind.ROBOT, EntityKind.MACHINE):
            engaged = sum(
                1
                for e in state.entities
                if e.kind is kind and e.current_subtask is not None and e.busy_until is not None
            )
            assert engaged == working[kind], f"{kind.value}: {engaged} working entities vs {working[kind]} active subtasks"
