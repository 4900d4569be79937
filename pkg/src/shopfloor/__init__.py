"""shopfloor: hierarchical task planning and allocation for production lines.

A discrete-event human-robot production simulator, a spatially-aware low-level
task allocator built on precomputed node-graph paths, a replay-efficient deep
Q-learning stack for high-level task planning, and a benchmark harness.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
