"""Training loop for the high-level task-planning agent.

Structure: interact for a full episode (decisions every tick, allocations via
the low-level allocator), run episode-end processing into the prioritized
buffer, and fire ``replay_period`` gradient steps every ``replay_period``
buffer insertions once the warm-up threshold has passed. The target network
is a hard copy refreshed every ``target_sync_every`` gradient steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..allocator import AllocatorKind
from ..neural.network import NetworkConfig, QNetwork
from ..neural.optim import Adam
from ..neural.tensor import Tensor, no_grad
from ..sim.encoding import StateLayout
from ..sim.env import ProductionEnv
from .policy import EpsilonSchedule, ExplorationKind, greedy_action, select_action
from .replay import PrioritizedReplay, Transition, episode_end_process
from .rollout import EpisodeResult, run_episode


@dataclass(frozen=True)
class TrainConfig:
    replay_capacity: int = 100_000
    batch_size: int = 64
    target_sync_every: int = 500
    warmup_transitions: int = 2_000
    replay_period: int = 4
    max_episodes: int = 300
    discount: float = 0.99
    learning_rate: float = 3e-4
    priority_exponent: float = 0.6
    min_priority: float = 1e-4
    beta_start: float = 0.4
    beta_end: float = 1.0
    exploration: ExplorationKind = ExplorationKind.EPSILON_GREEDY
    epsilon: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    efficient_buffer: bool = True
    reward_modify: bool = True
    double_dqn: bool = True
    eval_every: int = 10  # episodes between greedy evaluations (0 = never)
    eval_episodes: int = 10
    checkpoint_every: int = 0  # episodes between periodic checkpoints (0 = final only)
    success_stop: float | None = None  # stop early at this eval success rate

    def __post_init__(self):
        if self.batch_size > self.replay_capacity:
            raise ValueError("batch_size cannot exceed replay_capacity")
        if self.replay_period < 1:
            raise ValueError("replay_period must be >= 1")


def td_targets(
    batch: list[Transition],
    online: QNetwork,
    target: QNetwork,
    discount: float,
    double_dqn: bool = True,
) -> np.ndarray:
    """Bootstrap targets. Double mode picks the next action with the online
    network and evaluates it with the target network; single mode maxes the
    target network directly. Bootstraps only consider legal next actions, and
    terminal transitions are just their reward."""
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    terminal = np.array([t.terminal for t in batch], dtype=bool)
    if terminal.all() or discount == 0.0:
        return rewards + 0.0 * discount
    next_feats = _stack_features([t.next_state for t in batch])
    legal = np.stack([t.legal_next for t in batch])
    with no_grad():
        q_target = target.forward(next_feats).data
        if double_dqn:
            q_online = online.forward(next_feats).data
            choose_from = np.where(legal, q_online, -np.inf)
        else:
            choose_from = np.where(legal, q_target, -np.inf)
    best = np.argmax(choose_from, axis=1)
    bootstrap = q_target[np.arange(len(batch)), best]
    return rewards + discount * np.where(terminal, 0.0, bootstrap)


def _stack_features(features: list[dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    return {group: np.stack([f[group] for f in features]) for group in features[0]}


def sync_target(online: QNetwork, target: QNetwork) -> None:
    target.load_state_arrays(online.state_arrays())


def train_step(
    online: QNetwork,
    target: QNetwork,
    replay: PrioritizedReplay,
    optimizer: Adam,
    config: TrainConfig,
    beta: float,
    sample_rng: np.random.Generator,
    noise_rng: np.random.Generator,
) -> float:
    """One gradient step: sample, build targets, weighted squared TD loss,
    update, and refresh the sampled priorities with the new |TD| errors."""
    batch, indices, weights = replay.sample(config.batch_size, beta, sample_rng)
    targets = td_targets(batch, online, target, config.discount, config.double_dqn)
    feats = _stack_features([t.state for t in batch])
    actions = np.array([t.action for t in batch], dtype=np.int64)
    if online.config.noisy:
        online.resample_noise(noise_rng)
    q_pred = online.forward(feats).pick(actions)
    diff = (Tensor(targets, dtype=q_pred.data.dtype) - q_pred) * Tensor(weights, dtype=q_pred.data.dtype)
    loss = (diff * diff).mean()
    online.zero_grads()
    loss.backward()
    optimizer.step()
    loss_value = float(loss.data)
    if not math.isfinite(loss_value):
        raise RuntimeError(f"non-finite training loss {loss_value}")
    replay.update_priorities(indices, np.abs(targets - q_pred.data))
    return loss_value


@dataclass
class EpisodeLog:
    episode: int
    steps: int
    episode_return: float
    makespan: int
    progress: float
    success: bool
    loss_mean: float
    epsilon: float
    buffer_size: int
    eval_success: float | None = None
    eval_makespan: float | None = None


@dataclass
class TrainResult:
    logs: list[EpisodeLog]
    online: QNetwork
    layout: StateLayout
    train_steps: int
    total_transitions: int
    episodes_to_success: int | None  # first episode whose eval met success_stop
    best_eval_success: float | None = None
    best_eval_makespan: float | None = None


class Trainer:
    def __init__(
        self,
        env: ProductionEnv,
        net_config: NetworkConfig,
        config: TrainConfig,
        seed: int,
        allocator_kind: AllocatorKind = AllocatorKind.SAP,
        layout: StateLayout | None = None,
    ):
        self.env = env
        self.scenario = env.scenario
        self.config = config
        self.seed = seed
        self.allocator_kind = allocator_kind
        self.layout = layout if layout is not None else StateLayout.for_scenario(self.scenario)
        streams = np.random.SeedSequence(seed).spawn(6)
        self.rng_init = np.random.default_rng(streams[0])
        self.rng_explore = np.random.default_rng(streams[1])
        self.rng_noise = np.random.default_rng(streams[2])
        self.rng_sample = np.random.default_rng(streams[3])
        self.rng_alloc = np.random.default_rng(streams[4])
        self.rng_env_seeds = np.random.default_rng(streams[5])
        self.online = QNetwork(net_config, self.rng_init)
        self.target = QNetwork(net_config, self.rng_init)
        sync_target(self.online, self.target)
        self.target.set_noise_enabled(False)
        self.optimizer = Adam(self.online.named_params(), lr=config.learning_rate)
        self.replay = PrioritizedReplay(
            config.replay_capacity,
            priority_exponent=config.priority_exponent,
            min_priority=config.min_priority,
        )
        self.t_total = 0
        self.train_steps = 0
        self._best_arrays: dict | None = None
        self._best_eval: tuple[float, float] | None = None  # (success, -makespan)

    # -- schedules -----------------------------------------------------------------

    def _beta(self) -> float:
        cfg = self.config
        span = max(cfg.max_episodes, 1)
        frac = min(self._episode / span, 1.0)
        return cfg.beta_start + (cfg.beta_end - cfg.beta_start) * frac

    def _epsilon(self) -> float:
        if not self.config.exploration.uses_epsilon:
            return 0.0
        return self.config.epsilon.at(self._env_steps)

    # -- evaluation ------------------------------------------------------------------

    def evaluate(self, n_episodes: int, seed_base: int = 10_000_019) -> tuple[float, float, float]:
        """Greedy rollouts with exploration disabled. Returns (success rate,
        mean makespan, mean return)."""
        self.online.set_noise_enabled(False)
        decide = lambda feats, mask: greedy_action(self.online, feats, mask)
        results: list[EpisodeResult] = []
        for i in range(n_episodes):
            rng_alloc = np.random.default_rng(seed_base + 7 * i)
            results.append(
                run_episode(
                    self.env,
                    decide,
                    seed=seed_base + i,
                    layout=self.layout,
                    allocator_kind=self.allocator_kind,
                    allocator_rng=rng_alloc,
                )
            )
        success = float(np.mean([r.success for r in results]))
        makespan = float(np.mean([r.makespan for r in results]))
        ret = float(np.mean([r.episode_return for r in results]))
        return success, makespan, ret

    # -- main loop ---------------------------------------------------------------------

    def train(self, on_episode=None) -> TrainResult:
        cfg = self.config
        logs: list[EpisodeLog] = []
        self._env_steps = 0
        episodes_to_success: int | None = None
        for episode in range(1, cfg.max_episodes + 1):
            self._episode = episode
            self.online.set_noise_enabled(cfg.exploration.uses_noise)
            temp: list[Transition] = []

            def capture(feats, action, next_feats, reward, done, next_mask):
                temp.append(Transition(feats, action, next_feats, reward, done, next_mask.copy()))

            epsilon = self._epsilon()

            def decide(feats, mask):
                self._env_steps += 1
                return select_action(self.online, feats, mask, cfg.exploration, self._epsilon(), self.rng_explore)

            episode_seed = int(self.rng_env_seeds.integers(2**62))
            result = run_episode(
                self.env,
                decide,
                seed=episode_seed,
                layout=self.layout,
                allocator_kind=self.allocator_kind,
                allocator_rng=self.rng_alloc,
                on_transition=capture,
            )

            processed = episode_end_process(
                temp,
                success=result.success,
                makespan=result.makespan,
                horizon=self.scenario.horizon,
                reward=self.scenario.reward,
                efficient_buffer=cfg.efficient_buffer,
                reward_modify=cfg.reward_modify,
            )
            losses: list[float] = []
            beta = self._beta()
            for tr in processed:
                self.replay.push(tr)
                self.t_total += 1
                if self.t_total >= cfg.warmup_transitions and self.t_total % cfg.replay_period == 0:
                    if len(self.replay) >= cfg.batch_size:
                        for _ in range(cfg.replay_period):
                            losses.append(
                                train_step(
                                    self.online,
                                    self.target,
                                    self.replay,
                                    self.optimizer,
                                    cfg,
                                    beta,
                                    self.rng_sample,
                                    self.rng_noise,
                                )
                            )
                            self.train_steps += 1
                            if self.train_steps % cfg.target_sync_every == 0:
                                sync_target(self.online, self.target)

            log = EpisodeLog(
                episode=episode,
                steps=result.steps,
                episode_return=result.episode_return,
                makespan=result.makespan,
                progress=result.progress,
                success=result.success,
                loss_mean=float(np.mean(losses)) if losses else float("nan"),
                epsilon=epsilon,
                buffer_size=len(self.replay),
            )
            if cfg.eval_every and episode % cfg.eval_every == 0:
                eval_success, eval_makespan, _ = self.evaluate(cfg.eval_episodes)
                log.eval_success = eval_success
                log.eval_makespan = eval_makespan
                score = (eval_success, -eval_makespan)
                if self._best_eval is None or score > self._best_eval:
                    self._best_eval = score
                    self._best_arrays = self.online.state_arrays()
                if episodes_to_success is None and cfg.success_stop is not None and eval_success >= cfg.success_stop:
                    episodes_to_success = episode
            logs.append(log)
            if on_episode is not None:
                on_episode(log)
            if episodes_to_success is not None and cfg.success_stop is not None:
                break
        self.online.set_noise_enabled(False)
        return TrainResult(
            logs=logs,
            online=self.online,
            layout=self.layout,
            train_steps=self.train_steps,
            total_transitions=self.t_total,
            episodes_to_success=episodes_to_success,
            best_eval_success=self._best_eval[0] if self._best_eval else None,
            best_eval_makespan=-self._best_eval[1] if self._best_eval else None,
        )

    def restore_best(self) -> bool:
        """Load the best-evaluated parameters into the online network.

        Returns False when no evaluation ever ran."""
        if self._best_arrays is None:
            return False
        self.online.load_state_arrays(self._best_arrays)
        return True
