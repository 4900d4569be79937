import pytest

from shopfloor.sim.env import AllocationError, ProductionEnv, SimError, compute_reward
from shopfloor.sim.scenario import parse_scenario
from shopfloor.sim.types import (
    Allocation,
    EntityKind,
    RewardConfig,
    TaskStatus,
    WorldState,
)


def doc_no_travel(**overrides):
    """Tasks with no working-area nodes: pure work, exact hand-traceable ticks."""
    doc = {
        "world": {"width": 6.0, "height": 6.0},
        "resolution": 0.5,
        "area_nodes": {"n0": [1.0, 1.0], "n1": [5.0, 5.0]},
        "obstacles": [],
        "entities": {"humans": 1, "robots": 1, "machines": [], "materials": []},
        "order": 1,
        "horizon": 30,
        "reward": {"time_penalty": 0.01, "goal_reward": 1.0, "progress_reward": 0.1},
        "tasks": [
            {"id": "ta", "repeatable": False, "subtasks": [{"id": "s0", "class": "human", "duration": 2}]},
            {"id": "tb", "repeatable": False, "dependencies": ["ta"],
             "subtasks": [{"id": "s0", "class": "robot", "duration": 3}]},
            {"id": "tc", "repeatable": False, "subtasks": [{"id": "s0", "class": "human", "duration": 4}]},
        ],
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def env3():
    return ProductionEnv(parse_scenario(doc_no_travel()))


# -- reset -----------------------------------------------------------------------


def test_reset_deterministic(mini_env_factory):
    env = mini_env_factory()
    a = env.reset(42)
    b = env.reset(42)
    assert [e.position for e in a.entities] == [e.position for e in b.entities]
    assert a.tick == 0 and all(e.idle for e in a.entities)


def test_reset_seeds_decouple(mini_env_factory):
    env = mini_env_factory()
    a = env.reset(42)
    b = env.reset(43)
    assert [e.position for e in a.entities] != [e.position for e in b.entities]


def test_dependency_free_tasks_available_at_reset(env3):
    state = env3.reset(0)
    assert state.task_state["ta"].status is TaskStatus.AVAILABLE
    assert state.task_state["tc"].status is TaskStatus.AVAILABLE
    assert state.task_state["tb"].status is TaskStatus.LOCKED


def test_positions_only_for_movable_kinds(default_env_factory):
    state = default_env_factory().reset(5)
    for e in state.entities:
        assert (e.position is not None) == (e.kind in (EntityKind.HUMAN, EntityKind.ROBOT))


# -- legality ----------------------------------------------------------------------


def test_noop_always_legal_and_all_done_only_noop(env3):
    env3.reset(0)
    mask = env3.legal_actions()
    assert mask[3]  # idle action index = n_tasks
    # drive everything to completion
    env3.step(Allocation(task="ta", human="h0"))
    for _ in range(2):
        env3.step(None)
    env3.step(Allocation(task="tc", human="h0"))
    for _ in range(4):
        env3.step(None)
    env3.step(Allocation(task="tb", robot="r0"))
    while not env3.done:
        env3.step(None)
    mask = env3.legal_actions()
    assert mask[3] and not mask[:3].any()


def test_busy_human_blocks_human_tasks(env3):
    """Hand-traced: allocate ta at t0; while it runs (2 ticks), tc is illegal."""
    env3.reset(0)
    state, *_ = env3.step(Allocation(task="ta", human="h0"))
    assert state.task_state["ta"].status is TaskStatus.IN_PROGRESS
    mask = env3.legal_actions()
    assert not mask[0]  # ta already in progress
    assert not mask[2]  # tc needs the (busy) human
    assert not mask[1]  # tb still locked
    state, *_ = env3.step(None)  # ta finishes at tick 2
    assert state.task_state["ta"].status is TaskStatus.DONE
    mask = env3.legal_actions()
    assert mask[1] and mask[2]  # tb unlocked, tc human idle again


# -- stepping and rewards ------------------------------------------------------------


def test_noop_step_reward_and_clock(env3):
    env3.reset(0)
    state, reward, done, events = env3.step(None)
    assert state.tick == 1
    assert reward == pytest.approx(-0.01)
    assert not done and events == []


def test_task_completion_flow_and_success(env3):
    env3.reset(0)
    env3.step(Allocation(task="ta", human="h0"))
    env3.step(None)
    env3.step(Allocation(task="tc", human="h0"))
    for _ in range(4):
        env3.step(None)
    state, reward, done, events = env3.step(Allocation(task="tb", robot="r0"))
    for _ in range(2):
        state, reward, done, events = env3.step(None)
    assert done and state.products_done == 1
    # final tick reward: time penalty + progress + goal
    assert reward == pytest.approx(-0.01 + 0.1 + 1.0)
    assert any(e["type"] == "product_done" for e in events)


def test_horizon_failure_reward(env3):
    env3.reset(0)
    reward = None
    for _ in range(30):
        _, reward, done, _ = env3.step(None)
    assert done
    assert reward == pytest.approx(-0.01 - 1.0)
    with pytest.raises(SimError):
        env3.step(None)


def test_reward_decomposition_along_trajectory(env3):
    env3.reset(0)
    env3.step(Allocation(task="ta", human="h0"))
    allowed = set()
    for tp in (-0.01,):
        for pr in (0.0, 0.1):
            for gr in (-1.0, 0.0, 1.0):
                allowed.add(round(tp + pr + gr, 9))
    while not env3.done:
        _, reward, _, _ = env3.step(None)
        assert round(reward, 9) in allowed


# -- compute_reward unit cases --------------------------------------------------------


def _stub(tick, products):
    return WorldState(tick=tick, entities=[], task_state={}, products_done=products)


def test_compute_reward_cases():
    cfg = RewardConfig(time_penalty=0.01, goal_reward=1.0, progress_reward=0.1)
    # only the time penalty
    assert compute_reward(_stub(5, 0), _stub(6, 0), cfg, horizon=100, order_quantity=3) == pytest.approx(-0.01)
    # mid-episode product completion
    assert compute_reward(_stub(5, 0), _stub(6, 1), cfg, horizon=100, order_quantity=3) == pytest.approx(-0.01 + 0.1)
    # final product before the horizon
    assert compute_reward(_stub(50, 2), _stub(51, 3), cfg, horizon=100, order_quantity=3) == pytest.approx(
        -0.01 + 0.1 + 1.0
    )
    # failure at the horizon
    assert compute_reward(_stub(99, 1), _stub(100, 1), cfg, horizon=100, order_quantity=3) == pytest.approx(
        -0.01 - 1.0
    )
    # success exactly at the horizon: success takes precedence
    assert compute_reward(_stub(99, 2), _stub(100, 3), cfg, horizon=100, order_quantity=3) == pytest.approx(
        -0.01 + 0.1 + 1.0
    )


# -- allocation validation -------------------------------------------------------------


def test_allocation_missing_required_class(env3):
    env3.reset(0)
    with pytest.raises(AllocationError, match="needs_human"):
        env3.step(Allocation(task="ta"))


def test_allocation_wrong_kind(env3):
    env3.reset(0)
    with pytest.raises(AllocationError, match="robot"):
        env3.step(Allocation(task="ta", human="r0"))


def test_allocation_busy_entity_rejected_env_unchanged(env3):
    env3.reset(0)
    env3.step(Allocation(task="ta", human="h0"))
    before_tick = env3.state.tick
    with pytest.raises(AllocationError, match="in_progress|busy|available"):
        env3.step(Allocation(task="ta", human="h0"))
    with pytest.raises(AllocationError, match="busy"):
        env3.step(Allocation(task="tc", human="h0"))
    assert env3.state.tick == before_tick  # rejected steps leave the world alone


def test_allocation_unknown_ids(env3):
    env3.reset(0)
    with pytest.raises(AllocationError, match="unknown task"):
        env3.step(Allocation(task="nope", human="h0"))
    with pytest.raises(AllocationError, match="unknown entity"):
        env3.step(Allocation(task="ta", human="h9"))


# -- trajectory-level invariants ---------------------------------------------------------


def test_full_trajectory_determinism(mini_env_factory, mini_scenario):
    def run():
        env = mini_env_factory()
        env.reset(7)
        history = []
        env.step(Allocation(task="bench_fitting", human="h0"))
        while not env.done:
            state, reward, _, _ = env.step(None)
            history.append((state.tick, reward, tuple(e.position for e in state.entities if e.position)))
        return history

    assert run() == run()


def test_progress_monotone_and_bounded(mini_env_factory):
    env = mini_env_factory()
    env.reset(3)
    last = env.progress()
    assert last == 0.0
    env.step(Allocation(task="bench_fitting", human="h0"))
    while not env.done:
        env.step(None)
        now = env.progress()
        assert now >= last - 1e-12
        last = now
    # only the fitting task completed: progress strictly inside (0, 1)
    assert 0.0 < env.progress() < 1.0


def test_progress_reaches_one_on_success(env3):
    env3.reset(0)
    env3.step(Allocation(task="ta", human="h0"))
    env3.step(None)
    env3.step(Allocation(task="tc", human="h0"))
    for _ in range(4):
        env3.step(None)
    env3.step(Allocation(task="tb", robot="r0"))
    while not env3.done:
        env3.step(None)
    assert env3.progress() == 1.0
    assert env3.state.products_done == 1


def test_movement_accumulates_distance(mini_env_factory):
    env = mini_env_factory()
    env.reset(11)
    env.step(Allocation(task="bench_fitting", human="h0"))
    for _ in range(10):
        if env.done:
            break
        env.step(None)
    human = env.state.entity("h0")
    assert human.distance_moved > 0.0


# -- repeatable tasks and machines ----------------------------------------------------------


def test_repeatable_rearm_multi_unit():
    doc = doc_no_travel(order=2, horizon=40)
    doc["tasks"] = [
        {"id": "make", "repeatable": True, "subtasks": [{"id": "s0", "class": "human", "duration": 2}]},
    ]
    env = ProductionEnv(parse_scenario(doc))
    env.reset(0)
    env.step(Allocation(task="make", human="h0"))
    state, reward, done, _ = env.step(None)
    assert state.products_done == 1 and not done
    assert state.task_state["make"].status is TaskStatus.AVAILABLE  # re-armed
    assert reward == pytest.approx(-0.01 + 0.1)
    env.step(Allocation(task="make", human="h0"))
    state, reward, done, _ = env.step(None)
    assert done and state.products_done == 2
    assert state.task_state["make"].status is TaskStatus.DONE
    assert reward == pytest.approx(-0.01 + 0.1 + 1.0)


def test_machine_contention_waits():
    doc = doc_no_travel(entities={"humans": 2, "robots": 1, "machines": ["m0"], "materials": []}, horizon=50)
    doc["tasks"] = [
        {"id": "w1", "repeatable": False,
         "subtasks": [{"id": "load", "class": "human", "duration": 1},
                      {"id": "weld", "class": "machine", "duration": 3, "machine": "m0"}]},
        {"id": "w2", "repeatable": False,
         "subtasks": [{"id": "load", "class": "human", "duration": 1},
                      {"id": "weld", "class": "machine", "duration": 3, "machine": "m0"}]},
    ]
    env = ProductionEnv(parse_scenario(doc))
    env.reset(0)
    env.step(Allocation(task="w1", human="h0"))
    env.step(Allocation(task="w2", human="h1"))
    # t2: w1 loading done at t1, m0 welding w1; w2 waits for m0
    m0 = env.state.entity("m0")
    assert m0.current_task == "w1"
    assert env.state.task_state["w2"].execution.phase == "waiting_machine"
    for _ in range(3):
        env.step(None)  # w1 weld finishes at t5
    assert env.state.task_state["w1"].status is TaskStatus.DONE
    m0 = env.state.entity("m0")
    assert m0.current_task == "w2"  # claimed the freed machine
    while not env.done:
        env.step(None)
    assert env.state.products_done == 1


def test_conservation_invariant_runs_every_step(default_env_factory, default_scenario):
    """validate=True asserts class conservation and dependency safety per step."""
    from shopfloor.agent.rollout import first_legal_policy, run_episode

    env = default_env_factory()
    assert env.validate
    result = run_episode(env, first_legal_policy(default_scenario.idle_action), seed=21)
    assert result.success
