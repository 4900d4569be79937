"""Run orchestration: training runs, evaluation tables, sweeps, zero-shot.

Every training run writes a self-contained directory:
    config.snapshot   resolved config + embedded scenario (regenerates the run)
    metrics.csv       one row per training episode
    evals.csv         periodic greedy evaluations
    checkpoints/      versioned network checkpoints
    traces/           greedy episode traces for the Gantt exporter
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np

from ..agent.policy import EpsilonSchedule
from ..agent.rollout import EpisodeResult, random_policy, run_episode
from ..agent.trainer import TrainConfig, Trainer, TrainResult
from ..allocator import AllocatorKind
from ..neural.checkpoint import read_checkpoint, save_checkpoint
from ..neural.network import NetworkConfig, QNetwork
from ..sim.encoding import StateLayout
from ..sim.env import ProductionEnv
from ..sim.scenario import parse_scenario, scenario_hash
from ..sim.types import Scenario
from .algorithms import AlgorithmSpec, algorithm

METRIC_COLUMNS = ("episode", "steps", "return", "makespan", "progress", "success", "loss_mean", "epsilon", "buffer_size")


@dataclass(frozen=True)
class RunSpec:
    """One benchmark cell: which algorithm/allocator to train, on what, where.

    Optional sweep axes request post-training evaluation grids over crew sizes
    or order quantities using the final checkpoint.
    """

    scenario: str
    algorithm: str
    low_level: str = "SAP"
    seeds: tuple[int, ...] = (0,)
    output: str = "runs"
    episodes: int = 300
    sweep_humans: tuple[int, ...] = ()
    sweep_robots: tuple[int, ...] = ()
    sweep_orders: tuple[int, ...] = ()
    trials: int = 20
    train_overrides: dict | None = None
    net_overrides: dict | None = None

    def __post_init__(self):
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"seed collision in run spec: {self.seeds}")


def execute_runspec(spec: RunSpec) -> dict[int, Path]:
    """Train every seed of a RunSpec (and run its evaluation sweeps).

    Returns {seed: run directory}. Sweep tables land inside each run directory
    as sweep.csv / zeroshot.csv.
    """
    base = Path(spec.output)
    raw, _ = load_scenario_document(spec.scenario)
    out_dirs: dict[int, Path] = {}
    for seed in spec.seeds:
        run_dir = base / f"{spec.algorithm}_{spec.low_level}_s{seed}"
        run_training(
            spec.scenario,
            spec.algorithm,
            spec.low_level,
            seed,
            run_dir,
            episodes=spec.episodes,
            train_overrides=spec.train_overrides,
            net_overrides=spec.net_overrides,
        )
        checkpoint = run_dir / "checkpoints" / "final.ckpt"
        kind = AllocatorKind.parse(spec.low_level)
        if spec.sweep_humans and spec.sweep_robots:
            cells = evaluate_grid(
                raw, spec.algorithm, checkpoint, spec.sweep_humans, spec.sweep_robots,
                spec.trials, 910_000, kind,
            )
            columns, rows = stats_table(cells)
            write_csv(run_dir / "sweep.csv", columns, rows)
        if spec.sweep_orders:
            cells = evaluate_orders(
                raw, spec.algorithm, checkpoint, spec.sweep_orders, spec.trials, 920_000, kind
            )
            columns, rows = stats_table(cells)
            write_csv(run_dir / "zeroshot.csv", columns, rows)
        out_dirs[seed] = run_dir
    return out_dirs


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, columns: tuple[str, ...], rows: list[tuple]) -> None:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


# -- scenario plumbing -----------------------------------------------------------


def load_scenario_document(source: str) -> tuple[dict, Scenario]:
    """Resolve a scenario source (bundled name, file path, or raw dict) to the
    raw document plus the validated scenario."""
    if isinstance(source, dict):
        return source, parse_scenario(source)
    from importlib import resources

    from ..sim.scenario import BUNDLED

    if source in BUNDLED:
        raw = json.loads(resources.files("shopfloor.scenarios").joinpath(f"{source}.json").read_text())
        return raw, parse_scenario(raw, name=source)
    raw = json.loads(Path(source).read_text())
    return raw, parse_scenario(raw, name=Path(source).stem)


def apply_overrides(raw: dict, humans: int | None = None, robots: int | None = None, order: int | None = None) -> dict:
    doc = json.loads(json.dumps(raw))
    if humans is not None:
        doc["entities"]["humans"] = humans
    if robots is not None:
        doc["entities"]["robots"] = robots
    if order is not None:
        doc["order"] = order
    return doc


# -- training ---------------------------------------------------------------------


def default_train_config(spec: AlgorithmSpec, scenario: Scenario, episodes: int, **overrides) -> TrainConfig:
    decay = max(1, int(0.3 * episodes * scenario.horizon))
    base = TrainConfig(
        max_episodes=episodes,
        exploration=spec.exploration,
        efficient_buffer=spec.efficient_buffer,
        reward_modify=spec.reward_modify,
        double_dqn=spec.double_dqn,
        epsilon=EpsilonSchedule(decay_steps=decay),
    )
    return dc_replace(base, **overrides) if overrides else base


def default_net_config(spec: AlgorithmSpec, layout: StateLayout, scenario: Scenario, **overrides) -> NetworkConfig:
    base = NetworkConfig(
        group_widths=layout.group_widths,
        n_actions=scenario.n_actions,
        dueling=spec.dueling,
        noisy=spec.noisy,
    )
    return dc_replace(base, **overrides) if overrides else base


def run_training(
    scenario_source,
    algo_id: str,
    low_level: str,
    seed: int,
    out_dir: Path,
    episodes: int = 300,
    train_overrides: dict | None = None,
    net_overrides: dict | None = None,
) -> TrainResult:
    """Train one (algorithm, seed) cell and write the run directory."""
    spec = algorithm(algo_id)
    if not spec.trainable:
        raise ValueError(f"algorithm '{algo_id}' is not trainable")
    raw, scenario = load_scenario_document(scenario_source)
    allocator_kind = AllocatorKind.parse(low_level)
    layout = StateLayout.for_scenario(scenario)
    train_cfg = default_train_config(spec, scenario, episodes, **(train_overrides or {}))
    net_cfg = default_net_config(spec, layout, scenario, **(net_overrides or {}))

    out_dir = Path(out_dir)
    (out_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    (out_dir / "traces").mkdir(parents=True, exist_ok=True)

    env = ProductionEnv(scenario)
    trainer = Trainer(env, net_cfg, train_cfg, seed=seed, allocator_kind=allocator_kind, layout=layout)
    snapshot = {
        "algorithm": algo_id,
        "low_level": low_level,
        "seed": seed,
        "episodes": episodes,
        "scenario": raw,
        "scenario_hash": scenario_hash(scenario),
        "train_config": _train_config_dict(train_cfg),
        "net_config": net_cfg.to_dict(),
        "param_count": trainer.online.param_count(),
    }
    _atomic_write(out_dir / "config.snapshot", json.dumps(snapshot, indent=2, sort_keys=True) + "\n")

    # Metrics stream to disk as episodes finish so an aborted run keeps its log.
    metrics_path = out_dir / "metrics.csv"
    evals_path = out_dir / "evals.csv"
    metrics_path.write_text(",".join(METRIC_COLUMNS) + "\n")
    evals_path.write_text("episode,eval_success,eval_makespan\n")

    def append_log(log):
        row = (log.episode, log.steps, log.episode_return, log.makespan, log.progress,
               log.success, log.loss_mean, log.epsilon, log.buffer_size)
        with metrics_path.open("a") as fh:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
        if log.eval_success is not None:
            with evals_path.open("a") as fh:
                fh.write(",".join(_fmt(v) for v in (log.episode, log.eval_success, log.eval_makespan)) + "\n")

    try:
        result = trainer.train(on_episode=append_log)
    except BaseException:
        save_checkpoint(
            out_dir / "checkpoints" / "abort.ckpt",
            trainer.online,
            trainer.train_steps,
            {"layout": trainer.layout.to_dict(), "aborted": True},
        )
        raise
    trainer.restore_best()  # checkpoint the best-evaluated parameters

    extra = {
        "layout": result.layout.to_dict(),
        "scenario_hash": scenario_hash(scenario),
        "algorithm": algo_id,
        "low_level": low_level,
        "seed": seed,
    }
    save_checkpoint(out_dir / "checkpoints" / "final.ckpt", result.online, result.train_steps, extra)

    # One greedy trace for the Gantt tooling.
    trace_result = run_episode(
        env,
        lambda feats, mask: _greedy(result.online, feats, mask),
        seed=987_001,
        layout=layout,
        allocator_kind=allocator_kind,
        allocator_rng=np.random.default_rng(987_002),
        record_trace=True,
    )
    write_trace(out_dir / "traces" / "greedy_eval.jsonl", trace_result)
    return result


def _greedy(net: QNetwork, feats, mask) -> int:
    from ..agent.policy import greedy_action

    return greedy_action(net, feats, mask)


def _train_config_dict(cfg: TrainConfig) -> dict:
    d = {}
    for name in cfg.__dataclass_fields__:
        value = getattr(cfg, name)
        if isinstance(value, EpsilonSchedule):
            d[name] = {"start": value.start, "end": value.end, "decay_steps": value.decay_steps}
        elif hasattr(value, "value"):
            d[name] = value.value
        else:
            d[name] = value
    return d


def _train_config_from_dict(d: dict) -> dict:
    from ..agent.policy import ExplorationKind

    out = dict(d)
    out["epsilon"] = EpsilonSchedule(**d["epsilon"])
    out["exploration"] = next(k for k in ExplorationKind if k.value == d["exploration"])
    return out


def replay_run(run_dir: Path, out_dir: Path) -> TrainResult:
    """Regenerate a run directory from its embedded (config, seed) record."""
    snapshot = json.loads((Path(run_dir) / "config.snapshot").read_text())
    net_cfg = dict(snapshot["net_config"])
    spec = algorithm(snapshot["algorithm"])
    base_net = default_net_config(spec, StateLayout.for_scenario(parse_scenario(snapshot["scenario"])),
                                  parse_scenario(snapshot["scenario"]))
    net_overrides = {k: v for k, v in net_cfg.items() if getattr(base_net, k, None) != v and k != "group_widths"}
    train_overrides = _train_config_from_dict(snapshot["train_config"])
    # drop fields already implied by the algorithm id or episode count
    for implied in ("exploration", "efficient_buffer", "reward_modify", "double_dqn", "max_episodes"):
        train_overrides.pop(implied, None)
    return run_training(
        snapshot["scenario"],
        snapshot["algorithm"],
        snapshot["low_level"],
        snapshot["seed"],
        Path(out_dir),
        episodes=snapshot["episodes"],
        train_overrides=train_overrides,
        net_overrides=net_overrides,
    )


def write_trace(path: Path, result: EpisodeResult) -> None:
    lines = [json.dumps(record, sort_keys=True) for record in result.trace]
    summary = {
        "summary": True,
        "makespan": result.makespan,
        "success": result.success,
        "progress": result.progress,
        "return": result.episode_return,
        "total_distance": result.total_distance,
    }
    lines.append(json.dumps(summary, sort_keys=True))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trace(path: Path) -> tuple[list[dict], dict]:
    records = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    if not records or not records[-1].get("summary"):
        raise ValueError(f"trace {path} is truncated (missing summary record)")
    return records[:-1], records[-1]


# -- evaluation --------------------------------------------------------------------


@dataclass
class CellStats:
    label: str
    trials: int
    makespan_mean: float
    makespan_std: float
    success_rate: float
    progress_mean: float
    distance_mean: float


def evaluate_policy(
    scenario: Scenario,
    decide_factory,
    n_trials: int,
    seed_base: int,
    allocator_kind: AllocatorKind,
    layout: StateLayout | None = None,
    label: str = "cell",
) -> CellStats:
    """Run n greedy/no-noise trials and aggregate the spec metrics."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    env = ProductionEnv(scenario)
    results: list[EpisodeResult] = []
    for i in range(n_trials):
        decide = decide_factory(i)
        results.append(
            run_episode(
                env,
                decide,
                seed=seed_base + i,
                layout=layout,
                allocator_kind=allocator_kind,
                allocator_rng=np.random.default_rng(seed_base + 31 * i + 1),
            )
        )
    makespans = np.array([r.makespan for r in results], dtype=float)
    return CellStats(
        label=label,
        trials=n_trials,
        makespan_mean=float(makespans.mean()),
        makespan_std=float(makespans.std(ddof=1)) if n_trials > 1 else 0.0,
        success_rate=float(np.mean([r.success for r in results])),
        progress_mean=float(np.mean([r.progress for r in results])),
        distance_mean=float(np.mean([r.total_distance for r in results])),
    )


def load_policy(checkpoint_path, scenario: Scenario) -> tuple[QNetwork, StateLayout]:
    net, _, extra = read_checkpoint(checkpoint_path)
    layout = StateLayout.from_dict(extra["layout"])
    if not layout.compatible_with(scenario):
        raise ValueError("checkpoint layout does not match the evaluation scenario (action space or roster)")
    net.set_noise_enabled(False)
    return net, layout


def make_decide_factory(algo_id: str, net: QNetwork | None, seed_base: int = 555_000):
    """Policy factory per trial index; Random draws from a per-trial stream."""
    if algo_id == "Random":
        return lambda i: random_policy(np.random.default_rng(seed_base + i))
    assert net is not None

    def factory(i: int):
        return lambda feats, mask: _greedy(net, feats, mask)

    return factory


def evaluate_grid(
    raw_scenario: dict,
    algo_id: str,
    checkpoint_path,
    humans_range: tuple[int, ...],
    robots_range: tuple[int, ...],
    n_trials: int,
    seed_base: int,
    allocator_kind: AllocatorKind,
) -> list[CellStats]:
    """Crew-size sweep: one stats row per (humans, robots) cell."""
    cells = []
    for h in humans_range:
        for r in robots_range:
            scenario = parse_scenario(apply_overrides(raw_scenario, humans=h, robots=r))
            net = layout = None
            if algo_id != "Random":
                net, layout = load_policy(checkpoint_path, scenario)
            cells.append(
                evaluate_policy(
                    scenario,
                    make_decide_factory(algo_id, net, seed_base),
                    n_trials,
                    seed_base,
                    allocator_kind,
                    layout=layout,
                    label=f"H{h},R{r}",
                )
            )
    return cells


def evaluate_orders(
    raw_scenario: dict,
    algo_id: str,
    checkpoint_path,
    orders: tuple[int, ...],
    n_trials: int,
    seed_base: int,
    allocator_kind: AllocatorKind,
) -> list[CellStats]:
    """Zero-shot order-quantity sweep (task set fixed, so checkpoints apply)."""
    cells = []
    for order in orders:
        scenario = parse_scenario(apply_overrides(raw_scenario, order=order))
        net = layout = None
        if algo_id != "Random":
            net, layout = load_policy(checkpoint_path, scenario)
        cells.append(
            evaluate_policy(
                scenario,
                make_decide_factory(algo_id, net, seed_base),
                n_trials,
                seed_base,
                allocator_kind,
                layout=layout,
                label=f"Num{order}",
            )
        )
    return cells


def stats_table(cells: list[CellStats]) -> tuple[tuple[str, ...], list[tuple]]:
    columns = ("cell", "trials", "makespan_mean", "makespan_std", "success_rate", "progress_mean", "distance_mean")
    rows = [
        (c.label, c.trials, c.makespan_mean, c.makespan_std, c.success_rate, c.progress_mean, c.distance_mean)
        for c in cells
    ]
    return columns, rows
