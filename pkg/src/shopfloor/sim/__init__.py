from .types import (
    Allocation,
    EntityKind,
    EntityState,
    RewardConfig,
    Scenario,
    Subtask,
    Task,
    TaskStatus,
    WorldState,
)
from .scenario import (
    ScenarioError,
    load_scenario,
    parse_scenario,
    scenario_graph,
    scenario_grid,
    scenario_hash,
)
from .env import AllocationError, ProductionEnv, SimError, compute_reward
from .encoding import LayoutError, StateLayout, encode_state

__all__ = [
    "Allocation",
    "EntityKind",
    "EntityState",
    "RewardConfig",
    "Scenario",
    "Subtask",
    "Task",
    "TaskStatus",
    "WorldState",
    "ScenarioError",
    "load_scenario",
    "parse_scenario",
    "scenario_graph",
    "scenario_grid",
    "scenario_hash",
    "AllocationError",
    "ProductionEnv",
    "SimError",
    "compute_reward",
    "LayoutError",
    "StateLayout",
    "encode_state",
]
