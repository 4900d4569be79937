"""Working-area node graph: offline all-pairs paths over the occupancy grid."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .grid import GridMap
from .planner import Path, plan_path

FORMAT_VERSION = 1


class NodeGraphError(ValueError):
    pass


@dataclass(frozen=True)
class AreaNode:
    id: str
    position: tuple[float, float]


@dataclass
class NodeGraph:
    """All-pairs precomputed paths between named working-area nodes.

    Both directions of every reachable pair are stored; unreachable pairs are
    simply absent. ``grid_hash`` ties the graph to the map it was built on.
    """

    nodes: dict[str, AreaNode]
    paths: dict[tuple[str, str], Path]
    grid_hash: str = ""
    resolution: float = 0.0

    def path(self, src: str, dst: str) -> Path | None:
        if src == dst:
            raise NodeGraphError("no self-pairs are stored; handle same-node lookups at the caller")
        return self.paths.get((src, dst))

    def length(self, src: str, dst: str) -> float | None:
        if src == dst:
            return 0.0
        p = self.paths.get((src, dst))
        return None if p is None else p.length

    def node_ids(self) -> list[str]:
        return sorted(self.nodes)


def build_node_graph(grid: GridMap, nodes: list[AreaNode]) -> NodeGraph:
    """Plan every ordered pair of nodes and store the results."""
    for node in nodes:
        row, col = grid.world_to_cell(*node.position)
        if grid.cells[row, col]:
            raise NodeGraphError(f"node '{node.id}' at {node.position} lies in an occupied cell")
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        raise NodeGraphError("duplicate node ids")
    by_id = {n.id: n for n in nodes}
    paths: dict[tuple[str, str], Path] = {}
    for src in sorted(ids):
        for dst in sorted(ids):
            if src == dst:
                continue
            p = plan_path(grid, by_id[src].position, by_id[dst].position)
            if p is not None:
                paths[(src, dst)] = p
    return NodeGraph(nodes=by_id, paths=paths, grid_hash=grid.content_hash(), resolution=grid.resolution)


def nearest_free_node(position: tuple[float, float], nodes: list[AreaNode]) -> AreaNode:
    """Node with minimal Euclidean distance; ties go to the smallest id."""
    if not nodes:
        raise NodeGraphError("no nodes to snap to")
    px, py = position
    return min(nodes, key=lambda n: (math.hypot(n.position[0] - px, n.position[1] - py), n.id))


# -- persistence ----------------------------------------------------------------


def save_node_graph(graph: NodeGraph) -> bytes:
    doc = {
        "version": FORMAT_VERSION,
        "grid_hash": graph.grid_hash,
        "resolution": graph.resolution,
        "nodes": [
            {"id": n.id, "x": n.position[0], "y": n.position[1]} for n in (graph.nodes[i] for i in graph.node_ids())
        ],
        "paths": [
            {
                "src": src,
                "dst": dst,
                "length": p.length,
                "n_axial": p.n_axial,
                "n_diagonal": p.n_diagonal,
                "waypoints": [[x, y] for x, y in p.waypoints],
            }
            for (src, dst), p in sorted(graph.paths.items())
        ],
    }
    body = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    checksum = hashlib.sha256(body).hexdigest()
    return body + b"\n" + checksum.encode() + b"\n"


def load_node_graph(data: bytes) -> NodeGraph:
    try:
        body, checksum, _ = data.rsplit(b"\n", 2)
    except ValueError:
        raise NodeGraphError("truncated node-graph file") from None
    if hashlib.sha256(body).hexdigest() != checksum.decode(errors="replace"):
        raise NodeGraphError("node-graph checksum mismatch")
    doc = json.loads(body.decode())
    if doc.get("version") != FORMAT_VERSION:
        raise NodeGraphError(f"unsupported node-graph version {doc.get('version')}")
    nodes = {n["id"]: AreaNode(id=n["id"], position=(n["x"], n["y"])) for n in doc["nodes"]}
    paths = {}
    for rec in doc["paths"]:
        key = (rec["src"], rec["dst"])
        if rec["src"] not in nodes or rec["dst"] not in nodes:
            raise NodeGraphError(f"path references unknown node: {key}")
        paths[key] = Path(
            waypoints=tuple((x, y) for x, y in rec["waypoints"]),
            length=rec["length"],
            n_axial=rec["n_axial"],
            n_diagonal=rec["n_diagonal"],
        )
    return NodeGraph(nodes=nodes, paths=paths, grid_hash=doc["grid_hash"], resolution=doc["resolution"])
