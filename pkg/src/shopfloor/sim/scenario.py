"""Scenario file parsing, validation, and derived spatial structures.

The schema is documented in docs/scenario-format.md. Validation errors carry a
JSON-path style location (e.g. ``tasks[3].subtasks[0].duration``) so broken
files are easy to fix.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path as FsPath

from ..spatial.grid import GridMap, Rect, rasterize
from ..spatial.nodegraph import AreaNode, NodeGraph, build_node_graph
from .types import EntityKind, RewardConfig, Scenario, Subtask, Task

_CLASS_NAMES = {
    "human": EntityKind.HUMAN,
    "robot": EntityKind.ROBOT,
    "machine": EntityKind.MACHINE,
}

BUNDLED = ("default", "mini")


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _require(data: dict, key: str, kind, path: str):
    if key not in data:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
    value = data[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioError(f"{path}.{key}" if path else key, f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ScenarioError(f"{path}.{key}" if path else key, f"expected an integer, got {type(value).__name__}")
        return value
    if not isinstance(value, kind):
        raise ScenarioError(f"{path}.{key}" if path else key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _check_cycles(tasks: list[Task]) -> None:
    order: dict[str, int] = {}  # 0 = visiting, 1 = done
    graph = {t.id: t.dependencies for t in tasks}

    def visit(tid: str, chain: list[str]) -> None:
        mark = order.get(tid)
        if mark == 1:
            return
        if mark == 0:
            cycle = " -> ".join(chain + [tid])
            raise ScenarioError("tasks", f"dependency cycle: {cycle}")
        order[tid] = 0
        for dep in sorted(graph[tid]):
            visit(dep, chain + [tid])
        order[tid] = 1

    for tid in graph:
        visit(tid, [])


def _parse_subtask(data: dict, task_id: str, machine_ids: set[str], node_ids: set[str], path: str) -> Subtask:
    sid = _require(data, "id", str, path)
    class_name = _require(data, "class", str, path)
    if class_name not in _CLASS_NAMES:
        raise ScenarioError(f"{path}.class", f"unknown performer class '{class_name}'")
    duration = _require(data, "duration", int, path)
    if duration < 1:
        raise ScenarioError(f"{path}.duration", "must be >= 1")
    node = data.get("node")
    if node is not None and node not in node_ids:
        raise ScenarioError(f"{path}.node", f"unknown area node '{node}'")
    machine = data.get("machine")
    kind = _CLASS_NAMES[class_name]
    if machine is not None:
        if kind is not EntityKind.MACHINE:
            raise ScenarioError(f"{path}.machine", "machine binding only applies to machine-class subtasks")
        if machine not in machine_ids:
            raise ScenarioError(f"{path}.machine", f"unknown machine '{machine}'")
    return Subtask(id=f"{task_id}.{sid}", required_class=kind, duration=duration, location_node=node, machine=machine)


def parse_scenario(data: dict, name: str = "scenario") -> Scenario:
    world = _require(data, "world", dict, "")
    width = _require(world, "width", float, "world")
    height = _require(world, "height", float, "world")

    nodes_raw = _require(data, "area_nodes", dict, "")
    area_nodes: dict[str, tuple[float, float]] = {}
    for node_id, pos in nodes_raw.items():
        if not (isinstance(pos, list) and len(pos) == 2):
            raise ScenarioError(f"area_nodes.{node_id}", "expected [x, y]")
        area_nodes[node_id] = (float(pos[0]), float(pos[1]))

    obstacles = []
    for i, rect in enumerate(_require(data, "obstacles", list, "")):
        if not (isinstance(rect, list) and len(rect) == 4):
            raise ScenarioError(f"obstacles[{i}]", "expected [x1, y1, x2, y2]")
        try:
            obstacles.append(Rect(*map(float, rect)))
        except ValueError as exc:
            raise ScenarioError(f"obstacles[{i}]", str(exc)) from None

    entities = _require(data, "entities", dict, "")
    n_humans = _require(entities, "humans", int, "entities")
    n_robots = _require(entities, "robots", int, "entities")
    if n_humans < 1:
        raise ScenarioError("entities.humans", "at least one human is required")
    if n_robots < 1:
        raise ScenarioError("entities.robots", "at least one robot is required")
    machine_ids = tuple(entities.get("machines", []))
    material_ids = tuple(entities.get("materials", []))

    order = _require(data, "order", int, "")
    if order < 1:
        raise ScenarioError("order", "must be >= 1")
    horizon = _require(data, "horizon", int, "")
    if horizon < 1:
        raise ScenarioError("horizon", "must be >= 1")

    reward_raw = _require(data, "reward", dict, "")
    try:
        reward = RewardConfig(**reward_raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError("reward", str(exc)) from None

    speeds = data.get("speeds", {})
    human_speed = float(speeds.get("human", 1.2))
    robot_speed = float(speeds.get("robot", 1.5))
    if human_speed <= 0 or robot_speed <= 0:
        raise ScenarioError("speeds", "speeds must be positive")

    machine_set, node_set = set(machine_ids), set(area_nodes)
    tasks: list[Task] = []
    seen_ids: set[str] = set()
    for i, tdata in enumerate(_require(data, "tasks", list, "")):
        tpath = f"tasks[{i}]"
        tid = _require(tdata, "id", str, tpath)
        if tid in seen_ids:
            raise ScenarioError(f"{tpath}.id", f"duplicate task id '{tid}'")
        seen_ids.add(tid)
        subtasks = tuple(
            _parse_subtask(s, tid, machine_set, node_set, f"{tpath}.subtasks[{j}]")
            for j, s in enumerate(_require(tdata, "subtasks", list, tpath))
        )
        material = tdata.get("material")
        if material is not None and material not in material_ids:
            raise ScenarioError(f"{tpath}.material", f"unknown material '{material}'")
        try:
            tasks.append(
                Task(
                    id=tid,
                    subtasks=subtasks,
                    dependencies=frozenset(tdata.get("dependencies", [])),
                    repeatable=bool(tdata.get("repeatable", True)),
                    material=material,
                )
            )
        except ValueError as exc:
            raise ScenarioError(tpath, str(exc)) from None

    for i, task in enumerate(tasks):
        for dep in sorted(task.dependencies):
            if dep not in seen_ids:
                raise ScenarioError(f"tasks[{i}].dependencies", f"unknown task '{dep}'")
    _check_cycles(tasks)

    if order > 1 and not any(t.repeatable for t in tasks):
        raise ScenarioError("order", "order > 1 requires at least one repeatable task")

    scenario = Scenario(
        name=data.get("name", name),
        tasks=tuple(tasks),
        area_nodes=area_nodes,
        obstacles=tuple(obstacles),
        world_width=width,
        world_height=height,
        n_humans=n_humans,
        n_robots=n_robots,
        machine_ids=machine_ids,
        material_ids=material_ids,
        human_speed=human_speed,
        robot_speed=robot_speed,
        order_quantity=order,
        horizon=horizon,
        reward=reward,
        resolution=float(data.get("resolution", 0.25)),
    )

    # Spatial sanity: every named node must sit in free space.
    grid = scenario_grid(scenario)
    for node_id, (x, y) in sorted(area_nodes.items()):
        row, col = grid.world_to_cell(x, y)
        if grid.cells[row, col]:
            raise ScenarioError(f"area_nodes.{node_id}", "node lies inside an obstacle")
    return scenario


def load_scenario(source: str | FsPath | dict) -> Scenario:
    """Load from a dict, a JSON file path, or a bundled scenario name."""
    if isinstance(source, dict):
        return parse_scenario(source)
    if isinstance(source, str) and source in BUNDLED:
        text = resources.files("shopfloor.scenarios").joinpath(f"{source}.json").read_text()
        return parse_scenario(json.loads(text), name=source)
    path = FsPath(source)
    if not path.exists():
        raise ScenarioError(str(source), "scenario file not found")
    return parse_scenario(json.loads(path.read_text()), name=path.stem)


def scenario_grid(scenario: Scenario) -> GridMap:
    return rasterize(scenario.world_width, scenario.world_height, list(scenario.obstacles), scenario.resolution)


def scenario_graph(scenario: Scenario, grid: GridMap | None = None) -> NodeGraph:
    grid = grid if grid is not None else scenario_grid(scenario)
    nodes = [AreaNode(id=nid, position=pos) for nid, pos in sorted(scenario.area_nodes.items())]
    return build_node_graph(grid, nodes)


def scenario_hash(scenario: Scenario) -> str:
    """Stable content hash over everything that defines the task set and map."""
    doc = {
        "tasks": [
            {
                "id": t.id,
                "deps": sorted(t.dependencies),
                "repeatable": t.repeatable,
                "material": t.material,
                "subtasks": [
                    [s.id, s.required_class.value, s.duration, s.location_node, s.machine] for s in t.subtasks
                ],
            }
            for t in scenario.tasks
        ],
        "area_nodes": {k: list(v) for k, v in sorted(scenario.area_nodes.items())},
        "obstacles": [[r.x1, r.y1, r.x2, r.y2] for r in scenario.obstacles],
        "world": [scenario.world_width, scenario.world_height],
        "resolution": scenario.resolution,
        "machines": list(scenario.machine_ids),
        "materials": list(scenario.material_ids),
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()
