"""The task-selection Q-network.

Pipeline: per-group feedforward encoders -> self-attention stack over all
entity/task tokens -> one cross-attention block whose queries are the task
tokens plus a learned idle-action token -> dueling (or plain) output head.
The head streams are the only layers that may carry parameter noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import AttentionBlock
from .layers import Layer, MLP, Tensor
from .tensor import concat, no_grad

GROUP_ORDER = ("humans", "robots", "machines", "materials", "tasks")


@dataclass(frozen=True)
class NetworkConfig:
    group_widths: dict[str, int]
    n_actions: int
    d_model: int = 64
    n_heads: int = 2
    n_self_blocks: int = 2
    encoder_hidden: int = 64
    stream_hidden: int = 64
    dueling: bool = True
    noisy: bool = False
    dtype: str = "float64"

    def np_dtype(self):
        return np.dtype(self.dtype)

    def to_dict(self) -> dict:
        return {
            "group_widths": dict(self.group_widths),
            "n_actions": self.n_actions,
            "d_model": self.d_model,
            "n_heads": self.n_heads,
            "n_self_blocks": self.n_self_blocks,
            "encoder_hidden": self.encoder_hidden,
            "stream_hidden": self.stream_hidden,
            "dueling": self.dueling,
            "noisy": self.noisy,
            "dtype": self.dtype,
        }

    @staticmethod
    def from_dict(d: dict) -> "NetworkConfig":
        return NetworkConfig(**d)


class QNetwork(Layer):
    def __init__(self, config: NetworkConfig, rng: np.random.Generator):
        self.config = config
        dtype = config.np_dtype()
        d = config.d_model
        self.encoders = {
            group: MLP([config.group_widths[group], config.encoder_hidden, d], rng, dtype=dtype)
            for group in GROUP_ORDER
        }
        self.self_blocks = [
            AttentionBlock(d, config.n_heads, "self", rng, dtype=dtype) for _ in range(config.n_self_blocks)
        ]
        self.cross_block = AttentionBlock(d, config.n_heads, "cross", rng, dtype=dtype)
        self.idle_token = Tensor(
            rng.uniform(-1.0 / np.sqrt(d), 1.0 / np.sqrt(d), size=(1, d)).astype(dtype),
            requires_grad=True,
            dtype=dtype,
        )
        stream_dims = [d, config.stream_hidden, 1]
        if config.dueling:
            self.value_stream = MLP(stream_dims, rng, dtype=dtype, noisy=config.noisy)
            self.advantage_stream = MLP(stream_dims, rng, dtype=dtype, noisy=config.noisy)
            self._streams = [self.value_stream, self.advantage_stream]
        else:
            self.q_stream = MLP(stream_dims, rng, dtype=dtype, noisy=config.noisy)
            self._streams = [self.q_stream]

    # -- forward ---------------------------------------------------------------

    def _coerce_batch(self, features: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        dtype = self.config.np_dtype()
        out = {}
        for group in GROUP_ORDER:
            arr = np.asarray(features[group], dtype=dtype)
            if arr.ndim == 2:
                arr = arr[None, :, :]
            if arr.shape[-1] != self.config.group_widths[group]:
                raise ValueError(
                    f"group '{group}' has width {arr.shape[-1]}, expected {self.config.group_widths[group]}"
                )
            out[group] = arr
        return out

    def forward(self, features: dict[str, np.ndarray]) -> Tensor:
        """Q-values, shape (batch, n_actions). Accepts one state or a batch."""
        batch = self._coerce_batch(features)
        embedded = {group: self.encoders[group](Tensor(batch[group])) for group in GROUP_ORDER}
        tokens = concat([embedded[g] for g in GROUP_ORDER], axis=1)
        for block in self.self_blocks:
            tokens = block(tokens)

        b = tokens.shape[0]
        idle = self.idle_token.reshape(1, 1, self.config.d_model)
        idle = idle + Tensor(np.zeros((b, 1, self.config.d_model), dtype=tokens.data.dtype))
        queries = concat([embedded["tasks"], idle], axis=1)
        phi = self.cross_block(queries, tokens)

        if self.config.dueling:
            value = self.value_stream(phi.mean(axis=1))  # (b, 1)
            adv = self.advantage_stream(phi).reshape(b, -1)  # (b, n_actions)
            q = value + adv - adv.mean(axis=1, keepdims=True)
        else:
            q = self.q_stream(phi).reshape(b, -1)
        if q.shape[1] != self.config.n_actions:
            raise ValueError(f"forward produced {q.shape[1]} action values, expected {self.config.n_actions}")
        return q

    def q_values(self, features: dict[str, np.ndarray]) -> np.ndarray:
        """Gradient-free forward for a single state; returns a 1-D array."""
        with no_grad():
            return self.forward(features).data[0]

    # -- parameter plumbing ------------------------------------------------------

    def children(self):
        kids: list[Layer] = [self.encoders[g] for g in GROUP_ORDER]
        kids.extend(self.self_blocks)
        kids.append(self.cross_block)
        kids.extend(self._streams)
        return kids

    def named_params(self) -> list[tuple[str, Tensor]]:
        out: list[tuple[str, Tensor]] = []
        for group in GROUP_ORDER:
            out.extend((f"enc.{group}.{n}", p) for n, p in self.encoders[group].named_params())
        for i, block in enumerate(self.self_blocks):
            out.extend((f"self.{i}.{n}", p) for n, p in block.named_params())
        out.extend((f"cross.{n}", p) for n, p in self.cross_block.named_params())
        out.append(("idle_token", self.idle_token))
        if self.config.dueling:
            out.extend((f"value.{n}", p) for n, p in self.value_stream.named_params())
            out.extend((f"advantage.{n}", p) for n, p in self.advantage_stream.named_params())
        else:
            out.extend((f"q.{n}", p) for n, p in self.q_stream.named_params())
        return out

    def param_count(self) -> int:
        return sum(p.data.size for _, p in self.named_params())

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_params()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        params = dict(self.named_params())
        if set(params) != set(arrays):
            missing = set(params) ^ set(arrays)
            raise ValueError(f"parameter name mismatch: {sorted(missing)}")
        for name, p in params.items():
            if p.data.shape != arrays[name].shape:
                raise ValueError(f"shape mismatch for {name}")
            p.data = arrays[name].astype(p.data.dtype).copy()

    def zero_grads(self) -> None:
        for _, p in self.named_params():
            p.zero_grad()

    def clone(self) -> "QNetwork":
        twin = QNetwork(self.config, np.random.default_rng(0))
        twin.load_state_arrays(self.state_arrays())
        return twin


def dueling_q(value: np.ndarray, advantages: np.ndarray) -> np.ndarray:
    """Reference combination rule: q = v + a - mean(a), applied on raw arrays."""
    advantages = np.asarray(advantages, dtype=float)
    return value + advantages - advantages.mean(axis=-1, keepdims=True)
