from .tensor import Tensor, concat, no_grad, softmax
from .layers import Linear, NoisyLinear, LayerNorm, MLP
from .attention import AttentionBlock, MultiHeadAttention, attention
from .network import GROUP_ORDER, NetworkConfig, QNetwork, dueling_q
from .optim import Adam
from .checkpoint import (
    CheckpointError,
    dump_checkpoint,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)

__all__ = [
    "Tensor",
    "concat",
    "no_grad",
    "softmax",
    "Linear",
    "NoisyLinear",
    "LayerNorm",
    "MLP",
    "AttentionBlock",
    "MultiHeadAttention",
    "attention",
    "GROUP_ORDER",
    "NetworkConfig",
    "QNetwork",
    "dueling_q",
    "Adam",
    "CheckpointError",
    "dump_checkpoint",
    "load_checkpoint",
    "read_checkpoint",
    "save_checkpoint",
]
