from .grid import GridError, GridMap, Rect, rasterize
from .planner import Path, plan_path
from .nodegraph import (
    AreaNode,
    NodeGraph,
    NodeGraphError,
    build_node_graph,
    load_node_graph,
    nearest_free_node,
    save_node_graph,
)

__all__ = [
    "GridError",
    "GridMap",
    "Rect",
    "rasterize",
    "Path",
    "plan_path",
    "AreaNode",
    "NodeGraph",
    "NodeGraphError",
    "build_node_graph",
    "load_node_graph",
    "nearest_free_node",
    "save_node_graph",
]
