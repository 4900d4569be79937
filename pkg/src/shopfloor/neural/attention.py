"""Multi-head attention and pre-norm residual attention blocks."""

from __future__ import annotations

import numpy as np

from .layers import Layer, LayerNorm, Linear
from .tensor import Tensor, softmax


def attention(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    """softmax(q k^T / sqrt(d)) v over the last two axes, row-stabilized."""
    d = q.shape[-1]
    scores = (q @ k.swapaxes(-1, -2)) * (1.0 / np.sqrt(d))
    return softmax(scores, axis=-1) @ v


class MultiHeadAttention(Layer):
    def __init__(self, dim: int, n_heads: int, rng: np.random.Generator, dtype=np.float64):
        if dim % n_heads != 0:
            raise ValueError(f"model width {dim} not divisible by {n_heads} heads")
        self.dim = dim
        self.n_heads = n_heads
        self.head_dim = dim // n_heads
        self.proj_q = Linear(dim, dim, rng, dtype=dtype)
        self.proj_k = Linear(dim, dim, rng, dtype=dtype)
        self.proj_v = Linear(dim, dim, rng, dtype=dtype)
        self.proj_out = Linear(dim, dim, rng, dtype=dtype)

    def _split_heads(self, x: Tensor) -> Tensor:
        b, t, _ = x.shape
        return x.reshape(b, t, self.n_heads, self.head_dim).transpose((0, 2, 1, 3))

    def __call__(self, query: Tensor, keys: Tensor, values: Tensor) -> Tensor:
        b, tq, _ = query.shape
        q = self._split_heads(self.proj_q(query))
        k = self._split_heads(self.proj_k(keys))
        v = self._split_heads(self.proj_v(values))
        mixed = attention(q, k, v)
        merged = mixed.transpose((0, 2, 1, 3)).reshape(b, tq, self.dim)
        return self.proj_out(merged)

    def children(self):
        return [self.proj_q, self.proj_k, self.proj_v, self.proj_out]

    def named_params(self):
        out = []
        for tag, layer in (("q", self.proj_q), ("k", self.proj_k), ("v", self.proj_v), ("out", self.proj_out)):
            out.extend((f"{tag}.{name}", p) for name, p in layer.named_params())
        return out


class AttentionBlock(Layer):
    """Pre-norm residual attention. ``kind`` is "self" or "cross".

    Self blocks attend a token set to itself; cross blocks attend a query set
    to a separate key/value set (the residual runs along the query path).
    """

    def __init__(self, dim: int, n_heads: int, kind: str, rng: np.random.Generator, dtype=np.float64):
        if kind not in ("self", "cross"):
            raise ValueError(f"unknown attention block kind: {kind}")
        self.kind = kind
        self.mha = MultiHeadAttention(dim, n_heads, rng, dtype=dtype)
        self.norm_q = LayerNorm(dim, dtype=dtype)
        self.norm_kv = LayerNorm(dim, dtype=dtype) if kind == "cross" else self.norm_q

    def __call__(self, query: Tensor, context: Tensor | None = None) -> Tensor:
        if self.kind == "self":
            normed = self.norm_q(query)
            return query + self.mha(normed, normed, normed)
        assert context is not None, "cross block needs a key/value context"
        nq = self.norm_q(query)
        nkv = self.norm_kv(context)
        return query + self.mha(nq, nkv, nkv)

    def children(self):
        kids = [self.mha, self.norm_q]
        if self.kind == "cross":
            kids.append(self.norm_kv)
        return kids

    def named_params(self):
        out = [(f"mha.{n}", p) for n, p in self.mha.named_params()]
        out.extend((f"norm_q.{n}", p) for n, p in self.norm_q.named_params())
        if self.kind == "cross":
            out.extend((f"norm_kv.{n}", p) for n, p in self.norm_kv.named_params())
        return out
