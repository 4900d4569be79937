from .replay import (
    BufferError,
    PrioritizedReplay,
    Transition,
    episode_end_process,
    episode_outcome_bonus,
)
from .policy import EpsilonSchedule, ExplorationKind, greedy_action, masked_argmax, select_action
from .rollout import EpisodeResult, first_legal_policy, random_policy, run_episode
from .trainer import (
    EpisodeLog,
    TrainConfig,
    TrainResult,
    Trainer,
    sync_target,
    td_targets,
    train_step,
)

__all__ = [
    "BufferError",
    "PrioritizedReplay",
    "Transition",
    "episode_end_process",
    "episode_outcome_bonus",
    "EpsilonSchedule",
    "ExplorationKind",
    "greedy_action",
    "masked_argmax",
    "select_action",
    "EpisodeResult",
    "first_legal_policy",
    "random_policy",
    "run_episode",
    "EpisodeLog",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "sync_target",
    "td_targets",
    "train_step",
]
