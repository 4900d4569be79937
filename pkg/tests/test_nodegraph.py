import pytest

from shopfloor.sim.scenario import scenario_graph, scenario_grid
from shopfloor.spatial.grid import Rect, rasterize
from shopfloor.spatial.nodegraph import (
    AreaNode,
    NodeGraph,
    NodeGraphError,
    build_node_graph,
    load_node_graph,
    nearest_free_node,
    save_node_graph,
)

from .oracles import flood_fill_reachable


def open_grid():
    return rasterize(10.0, 10.0, [], 0.5)


def test_two_reachable_nodes_symmetric():
    grid = open_grid()
    graph = build_node_graph(grid, [AreaNode("a", (1.0, 1.0)), AreaNode("b", (8.0, 6.0))])
    assert set(graph.paths) == {("a", "b"), ("b", "a")}
    assert graph.length("a", "b") == graph.length("b", "a")


def test_walled_off_node_absent():
    grid = rasterize(10.0, 10.0, [Rect(6.0, 0.0, 7.0, 10.0)], 0.5)
    nodes = [AreaNode("a", (1.0, 1.0)), AreaNode("b", (3.0, 8.0)), AreaNode("c", (9.0, 5.0))]
    graph = build_node_graph(grid, nodes)
    assert ("a", "b") in graph.paths and ("b", "a") in graph.paths
    for pair in (("a", "c"), ("c", "a"), ("b", "c"), ("c", "b")):
        assert pair not in graph.paths
    # flood-fill oracle agrees on reachability
    reach = flood_fill_reachable(grid.cells, grid.world_to_cell(1.0, 1.0))
    assert grid.world_to_cell(3.0, 8.0) in reach
    assert grid.world_to_cell(9.0, 5.0) not in reach


def test_node_in_obstacle_error_names_node():
    grid = rasterize(10.0, 10.0, [Rect(4.0, 4.0, 6.0, 6.0)], 0.5)
    with pytest.raises(NodeGraphError, match="blocked"):
        build_node_graph(grid, [AreaNode("ok", (1.0, 1.0)), AreaNode("blocked", (5.0, 5.0))])


def test_default_scenario_graph_complete(default_scenario):
    grid = scenario_grid(default_scenario)
    graph = scenario_graph(default_scenario, grid)
    ids = graph.node_ids()
    assert len(ids) == len(default_scenario.area_nodes)
    for a in ids:
        for b in ids:
            if a != b:
                assert (a, b) in graph.paths, f"missing {a}->{b}"
    # graph symmetry across the real map
    for a, b in graph.paths:
        assert graph.length(a, b) == graph.length(b, a)
    # reachability oracle confirms one component over all node cells
    cells = [grid.world_to_cell(*graph.nodes[i].position) for i in ids]
    reach = flood_fill_reachable(grid.cells, cells[0])
    assert all(c in reach for c in cells)


def test_lookup_equals_fresh_plan(default_scenario):
    from shopfloor.spatial.planner import plan_path

    grid = scenario_grid(default_scenario)
    graph = scenario_graph(default_scenario, grid)
    ids = graph.node_ids()
    for a, b in [(ids[0], ids[1]), (ids[2], ids[0])]:
        fresh = plan_path(grid, graph.nodes[a].position, graph.nodes[b].position)
        stored = graph.path(a, b)
        assert fresh.waypoints == stored.waypoints
        assert fresh.length == stored.length


def test_nearest_node_rules():
    nodes = [AreaNode("a", (1.0, 1.0)), AreaNode("b", (5.0, 5.0))]
    assert nearest_free_node((1.0, 1.0), nodes).id == "a"
    assert nearest_free_node((1.1, 0.9), nodes).id == "a"
    # equidistant -> lexicographically smaller id
    tie = [AreaNode("beta", (0.0, 2.0)), AreaNode("alpha", (0.0, -2.0))]
    assert nearest_free_node((0.0, 0.0), tie).id == "alpha"
    with pytest.raises(NodeGraphError):
        nearest_free_node((0.0, 0.0), [])


def test_save_load_roundtrip(default_scenario):
    graph = scenario_graph(default_scenario)
    blob = save_node_graph(graph)
    loaded = load_node_graph(blob)
    assert loaded.grid_hash == graph.grid_hash
    assert set(loaded.paths) == set(graph.paths)
    for key, path in graph.paths.items():
        other = loaded.paths[key]
        assert other.length == path.length  # bit-exact float roundtrip
        assert other.waypoints == path.waypoints
    assert save_node_graph(loaded) == blob


def test_roundtrip_empty_graph():
    graph = NodeGraph(nodes={}, paths={}, grid_hash="x", resolution=0.5)
    loaded = load_node_graph(save_node_graph(graph))
    assert loaded.paths == {} and loaded.nodes == {}


def test_corruption_fails_closed(default_scenario):
    blob = bytearray(save_node_graph(scenario_graph(default_scenario)))
    blob[10] ^= 0x5A
    with pytest.raises(NodeGraphError, match="checksum"):
        load_node_graph(bytes(blob))


def test_truncation_fails_closed():
    with pytest.raises(NodeGraphError):
        load_node_graph(b"not json")


def test_version_mismatch_rejected():
    graph = NodeGraph(nodes={}, paths={}, grid_hash="", resolution=0.5)
    blob = save_node_graph(graph).decode()
    import hashlib
    import json

    doc = json.loads(blob.rsplit("\n", 2)[0])
    doc["version"] = 99
    body = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    tampered = body + b"\n" + hashlib.sha256(body).hexdigest().encode() + b"\n"
    with pytest.raises(NodeGraphError, match="version"):
        load_node_graph(tampered)
