"""Network building blocks: affine layers, noisy affine layers, layer norm, MLPs.

Every layer exposes ``named_params()`` so networks can be checkpointed, cloned
into target networks, and finite-difference checked parameter by parameter.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class Layer:
    """Base class: parameter registry plus train/eval noise switching."""

    def named_params(self) -> list[tuple[str, Tensor]]:
        raise NotImplementedError

    def children(self) -> list["Layer"]:
        return []

    def set_noise_enabled(self, enabled: bool) -> None:
        for child in self.children():
            child.set_noise_enabled(enabled)

    def resample_noise(self, rng: np.random.Generator) -> None:
        for child in self.children():
            child.resample_noise(rng)


def _fan_in_uniform(rng: np.random.Generator, shape: tuple, fan_in: int, dtype) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Linear(Layer):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float64):
        self.weight = Tensor(_fan_in_uniform(rng, (in_dim, out_dim), in_dim, dtype), requires_grad=True, dtype=dtype)
        self.bias = Tensor(np.zeros(out_dim, dtype=dtype), requires_grad=True, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias

    def named_params(self):
        return [("weight", self.weight), ("bias", self.bias)]


class NoisyLinear(Layer):
    """Affine layer with learnable factorized Gaussian weight noise.

    With noise enabled the output is (W + W_sigma * eps_w) x + (b + b_sigma * eps_b)
    for the most recently sampled eps; with noise disabled (or all-zero sigmas)
    it is exactly the plain affine map. Noise is held fixed between
    ``resample_noise`` calls so repeated forwards are reproducible.
    """

    SIGMA_INIT = 0.5

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float64):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = Tensor(_fan_in_uniform(rng, (in_dim, out_dim), in_dim, dtype), requires_grad=True, dtype=dtype)
        self.bias = Tensor(np.zeros(out_dim, dtype=dtype), requires_grad=True, dtype=dtype)
        sigma = self.SIGMA_INIT / np.sqrt(in_dim)
        self.weight_sigma = Tensor(np.full((in_dim, out_dim), sigma, dtype=dtype), requires_grad=True, dtype=dtype)
        self.bias_sigma = Tensor(np.full(out_dim, sigma, dtype=dtype), requires_grad=True, dtype=dtype)
        self._eps_w = np.zeros((in_dim, out_dim), dtype=dtype)
        self._eps_b = np.zeros(out_dim, dtype=dtype)
        self._noise_enabled = False

    @staticmethod
    def _scale(x: np.ndarray) -> np.ndarray:
        return np.sign(x) * np.sqrt(np.abs(x))

    def resample_noise(self, rng: np.random.Generator) -> None:
        eps_in = self._scale(rng.standard_normal(self.in_dim))
        eps_out = self._scale(rng.standard_normal(self.out_dim))
        self._eps_w = np.outer(eps_in, eps_out).astype(self.weight.data.dtype)
        self._eps_b = eps_out.astype(self.bias.data.dtype)

    def set_noise_enabled(self, enabled: bool) -> None:
        self._noise_enabled = enabled

    def __call__(self, x: Tensor) -> Tensor:
        if not self._noise_enabled:
            return x @ self.weight + self.bias
        eps_w = Tensor(self._eps_w, dtype=self.weight.data.dtype)
        eps_b = Tensor(self._eps_b, dtype=self.bias.data.dtype)
        weight = self.weight + self.weight_sigma * eps_w
        bias = self.bias + self.bias_sigma * eps_b
        return x @ weight + bias

    def named_params(self):
        return [
            ("weight", self.weight),
            ("bias", self.bias),
            ("weight_sigma", self.weight_sigma),
            ("bias_sigma", self.bias_sigma),
        ]


class LayerNorm(Layer):
    def __init__(self, dim: int, dtype=np.float64, eps: float = 1e-5):
        self.gain = Tensor(np.ones(dim, dtype=dtype), requires_grad=True, dtype=dtype)
        self.shift = Tensor(np.zeros(dim, dtype=dtype), requires_grad=True, dtype=dtype)
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        from .tensor import layer_norm

        return layer_norm(x, self.gain, self.shift, self.eps)

    def named_params(self):
        return [("gain", self.gain), ("shift", self.shift)]


class MLP(Layer):
    """Feedforward stack with tanh between layers; optionally noisy throughout.

    tanh keeps the whole network smooth, which the finite-difference gradient
    oracles rely on (no kink-crossing artifacts).
    """

    def __init__(
        self,
        dims: list[int],
        rng: np.random.Generator,
        dtype=np.float64,
        noisy: bool = False,
    ):
        cls = NoisyLinear if noisy else Linear
        self.layers = [cls(dims[i], dims[i + 1], rng, dtype=dtype) for i in range(len(dims) - 1)]

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = x.tanh()
        return x

    def children(self):
        return list(self.layers)

    def named_params(self):
        out = []
        for i, layer in enumerate(self.layers):
            out.extend((f"{i}.{name}", p) for name, p in layer.named_params())
        return out
