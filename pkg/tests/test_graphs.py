import numpy as np
import pytest

from detcond.graphs import (FiniteGraph, build_box, builtin_graph, contract,
                            grid_graph, parse_edge_list, planar_dual,
                            write_edge_list)


def test_build_box_1d_path():
    g = build_box(1, 1)
    assert g.n == 3
    assert g.m == 2


def test_build_box_2d_free():
    # 3x3 grid counted by hand: 9 vertices, 2*3*2 = 12 edges
    g = build_box(2, 1)
    assert g.n == 9
    assert g.m == 12
    assert len(g.boundary) == 8


def test_build_box_2d_wired():
    # contracting the 8 boundary vertices keeps the 4 center edges as
    # parallel edges and drops the 8 boundary-boundary self-loops
    g = build_box(2, 1, wired=True)
    assert g.n == 2
    assert g.m == 4
    assert len({frozenset(e) for e in g.edges}) == 1


def test_build_box_3d():
    g = build_box(3, 1)
    assert g.n == 27
    assert g.m == 3 * 9 * 2


def test_box_parameter_validation():
    with pytest.raises(ValueError):
        build_box(0, 1)
    with pytest.raises(ValueError):
        build_box(2, 0)


@pytest.mark.parametrize("name", ["edge", "triangle", "c4", "k4", "grid2x2",
                                  "grid2x3", "grid3x3", "lambda1", "lambda1w",
                                  "lambda2"])
def test_handshake_identity(name):
    g = builtin_graph(name)
    assert sum(g.degrees()) == 2 * g.m


def test_disconnected_rejected():
    with pytest.raises(ValueError):
        FiniteGraph(4, [(0, 1), (2, 3)])


def test_contract_triangle_edge():
    g = builtin_graph("triangle")
    res = contract(g, [0])
    assert res.graph.n == 2
    assert res.graph.m == 2
    assert res.edge_map[0] is None
    assert res.edge_map[1] is not None and res.edge_map[2] is not None


def test_contract_boundary_equals_wired_box():
    free = build_box(2, 1)
    res = contract(free, sorted(free.boundary), kind="vertices")
    wired = build_box(2, 1, wired=True)
    assert res.graph.n == wired.n
    assert res.graph.m == wired.m
    assert sorted(res.graph.degrees()) == sorted(wired.degrees())


def test_contract_to_single_vertex_is_error():
    g = builtin_graph("path3")
    with pytest.raises(ValueError):
        contract(g, [0, 1])


def test_contract_vertex_count():
    # edges 0,1,2 of the 3x3 grid span one component of 4 vertices,
    # so |V'| = |V| - (4 - 1)
    g = builtin_graph("grid3x3")
    spanned = {v for e in (0, 1, 2) for v in g.edges[e]}
    assert len(spanned) == 4
    res = contract(g, [0, 1, 2])
    assert res.graph.n == g.n - 3
    assert res.graph.n == len(set(res.vertex_map))


def test_planar_dual_triangle():
    g = builtin_graph("triangle")
    dual, emap = planar_dual(g)
    assert dual.n == 2          # inner face + outer face
    assert dual.m == 3
    assert emap == [0, 1, 2]


def test_planar_dual_single_edge():
    dual, _ = planar_dual(builtin_graph("edge"))
    assert dual.n == 1
    assert dual.edges == [(0, 0)]


def test_planar_dual_grid2x2():
    dual, _ = planar_dual(builtin_graph("grid2x2"))
    assert dual.n == 2
    assert dual.m == 4


def test_planar_dual_euler():
    g = builtin_graph("grid3x3")
    dual, _ = planar_dual(g)
    assert g.n - g.m + dual.n == 2
    assert dual.m == g.m


@pytest.mark.parametrize("name", ["triangle", "grid2x2", "grid2x3", "grid3x3"])
def test_dual_is_involution_up_to_isomorphism(name):
    nx = pytest.importorskip("networkx")
    g = builtin_graph(name)
    dual, _ = planar_dual(g)
    ddual, _ = planar_dual(dual)

    def to_nx(fg):
        h = nx.MultiGraph()
        h.add_nodes_from(range(fg.n))
        h.add_edges_from(fg.edges)
        return h

    assert nx.is_isomorphic(to_nx(g), to_nx(ddual))


def test_edge_list_roundtrip():
    g = builtin_graph("lambda1")
    text = write_edge_list(g)
    g2 = parse_edge_list(text)
    assert g2.n == g.n
    assert g2.edges == g.edges
    assert g2.boundary == g.boundary
    assert g2.embedding == g.embedding


def test_edge_list_parse_errors():
    with pytest.raises(ValueError):
        parse_edge_list("not a graph\n0 1\n")
    with pytest.raises(ValueError):
        parse_edge_list("graph v=2 e=2 d=0\n0 1\n")


def test_grid_graph_shape():
    g = grid_graph(16, 16)
    assert g.n == 256
    assert g.m == 2 * 16 * 15
    assert len(g.boundary) == 4 * 15
