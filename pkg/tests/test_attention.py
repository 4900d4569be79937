import numpy as np
import pytest

from shopfloor.neural.attention import AttentionBlock, MultiHeadAttention, attention
from shopfloor.neural.tensor import Tensor

from .oracles import attention_loops, finite_difference_gradients, gradient_mismatch


def test_single_matching_key_returns_value(rng):
    q = Tensor(rng.standard_normal((1, 1, 4)))
    v = Tensor(rng.standard_normal((1, 1, 4)))
    out = attention(q, q, v)
    assert np.allclose(out.data, v.data)


def test_two_identical_keys_average_values(rng):
    q = Tensor(rng.standard_normal((1, 1, 4)))
    key = rng.standard_normal(4)
    k = Tensor(np.stack([key, key])[None])
    v1, v2 = rng.standard_normal(4), rng.standard_normal(4)
    v = Tensor(np.stack([v1, v2])[None])
    out = attention(q, k, v)
    assert np.allclose(out.data[0, 0], (v1 + v2) / 2.0)


def test_attention_matches_loop_oracle(rng):
    q = rng.standard_normal((4, 8))
    k = rng.standard_normal((6, 8))
    v = rng.standard_normal((6, 8))
    fast = attention(Tensor(q[None]), Tensor(k[None]), Tensor(v[None])).data[0]
    slow = attention_loops(q, k, v)
    assert np.allclose(fast, slow, atol=1e-6)


def test_mha_requires_divisible_width(rng):
    with pytest.raises(ValueError):
        MultiHeadAttention(10, 3, rng)


def test_mha_gradients_match_fd(rng):
    mha = MultiHeadAttention(8, 2, rng)
    x = rng.standard_normal((1, 3, 8))
    w = rng.standard_normal((1, 3, 8))

    def build():
        t = Tensor(x)
        return (mha(t, t, t) * Tensor(w)).sum()

    build().backward()
    fd = finite_difference_gradients(lambda: float(build().data), mha.named_params(), max_entries=24)
    for name, p in mha.named_params():
        assert gradient_mismatch(p.grad, fd[name]) < 1e-4, name


def test_self_block_residual_passthrough_at_zero_out_proj(rng):
    block = AttentionBlock(8, 2, "self", rng)
    block.mha.proj_out.weight.data[:] = 0.0
    block.mha.proj_out.bias.data[:] = 0.0
    x = Tensor(rng.standard_normal((2, 4, 8)))
    out = block(x)
    assert np.allclose(out.data, x.data)


def test_cross_block_gradients_match_fd(rng):
    block = AttentionBlock(8, 2, "cross", rng)
    q = rng.standard_normal((1, 2, 8))
    kv = rng.standard_normal((1, 5, 8))
    w = rng.standard_normal((1, 2, 8))

    def build():
        return (block(Tensor(q), Tensor(kv)) * Tensor(w)).sum()

    build().backward()
    fd = finite_difference_gradients(lambda: float(build().data), block.named_params(), max_entries=16)
    for name, p in block.named_params():
        assert gradient_mismatch(p.grad, fd[name]) < 1e-4, name


def test_unknown_block_kind_rejected(rng):
    with pytest.raises(ValueError):
        AttentionBlock(8, 2, "sideways", rng)
