from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from randcontract.flows import karger_min_cut, min_edge_cut_bounded, min_vertex_cut_bounded, vertex_disjoint_paths
from randcontract.graph import MultiGraph, connected_components, reachable

from _util import complete, cycle, multigraphs, path


def two_triangles_with_bridge() -> MultiGraph:
    return MultiGraph.from_edges(range(6), [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def brute_edge_cut(g: MultiGraph, u: int, v: int, k: int):
    ids = g.edge_ids()
    for size in range(k + 1):
        for f in itertools.combinations(ids, size):
            if v not in reachable(g, u, f):
                return size
    return None


def brute_vertex_cut(g: MultiGraph, u: int, v: int, k: int, forbidden=()):
    cand = [x for x in g.vertices if x not in (u, v) and x not in forbidden]
    for size in range(k + 1):
        for z in itertools.combinations(cand, size):
            comps = connected_components(g, removed_vertices=z)
            if not any(u in c and v in c for c in comps):
                return size
    return None


def test_k4_exceeds():
    assert min_edge_cut_bounded(complete(4), 0, 3, 2).exceeds


def test_path_single_edge_cut():
    res = min_edge_cut_bounded(path(3), 0, 2, 1)
    assert not res.exceeds and res.size == 1 and res.source_side <= {0, 1}


def test_bridge_found():
    g = two_triangles_with_bridge()
    res = min_edge_cut_bounded(g, 0, 5, 3)
    assert res.size == 1 and res.cut == frozenset({6})
    assert brute_edge_cut(g, 0, 5, 3) == 1
    assert res.source_side == frozenset({0, 1, 2})


def test_edge_cut_rejects_equal_endpoints():
    with pytest.raises(ValueError):
        min_edge_cut_bounded(path(3), 1, 1, 1)


def test_vertex_cut_examples():
    g = path(3)
    assert min_vertex_cut_bounded(g, 0, 2, 1).cut == frozenset({1})
    assert min_vertex_cut_bounded(g, 0, 2, 1, forbidden={1}).exceeds
    theta = MultiGraph.from_edges(range(4), [(0, 1), (1, 3), (0, 2), (2, 3)])
    assert min_vertex_cut_bounded(theta, 0, 3, 1).exceeds
    res = min_vertex_cut_bounded(theta, 0, 3, 2)
    assert res.cut == frozenset({1, 2}) and brute_vertex_cut(theta, 0, 3, 2) == 2


def test_adjacent_vertices_cannot_be_separated():
    assert min_vertex_cut_bounded(path(2), 0, 1, 5).exceeds


def test_parallel_edges_count_separately():
    g = MultiGraph.from_edges([0, 1], [(0, 1)] * 3)
    assert min_edge_cut_bounded(g, 0, 1, 2).exceeds
    assert min_edge_cut_bounded(g, 0, 1, 3).size == 3


def test_karger_examples():
    hits = sum(karger_min_cut(two_triangles_with_bridge(), 200, seed)[0] == 1 for seed in range(20))
    assert hits == 20
    assert karger_min_cut(cycle(5), 50, 0)[0] == 2
    assert karger_min_cut(path(2), 1, 0) == (1, frozenset({0}))
    assert karger_min_cut(MultiGraph.from_edges(range(3), [(0, 1)]), 5, 0) == (0, frozenset())


def test_disjoint_paths_are_disjoint():
    g = complete(6)
    paths = vertex_disjoint_paths(g, [0, 1], [4, 5], 5)
    assert len(paths) == 2
    used = [v for p in paths for v in p]
    assert len(used) == len(set(used))


@given(multigraphs(min_n=2, max_n=9, connected=True), st.integers(0, 3), st.data())
def test_edge_cut_matches_enumeration(g, k, data):
    u, v = data.draw(st.sampled_from(list(itertools.combinations(g.vertices, 2))))
    res = min_edge_cut_bounded(g, u, v, k)
    best = brute_edge_cut(g, u, v, k)
    if best is None:
        assert res.exceeds
    else:
        assert not res.exceeds and res.size == best == len(res.cut)
        assert v not in reachable(g, u, res.cut)


@given(multigraphs(min_n=3, max_n=8, connected=True), st.integers(0, 3), st.data())
def test_vertex_cut_matches_enumeration(g, k, data):
    u, v = data.draw(st.sampled_from(list(itertools.combinations(g.vertices, 2))))
    others = [x for x in g.vertices if x not in (u, v)]
    forbidden = set(data.draw(st.lists(st.sampled_from(others), unique=True, max_size=2))) if others else set()
    res = min_vertex_cut_bounded(g, u, v, k, forbidden)
    best = None if g.multiplicity(u, v) else brute_vertex_cut(g, u, v, k, forbidden)
    if best is None:
        assert res.exceeds
    else:
        assert res.size == best and not (res.cut & forbidden)
        comps = connected_components(g, removed_vertices=res.cut)
        assert not any(u in c and v in c for c in comps)


@given(multigraphs(min_n=2, max_n=8, connected=True), st.integers(0, 50))
def test_karger_reports_a_real_cut(g, seed):
    size, cut = karger_min_cut(g, 5, seed)
    assert size == len(cut)
    assert len(connected_components(g.remove_edges(cut))) >= 2
    true_min = min(min_edge_cut_bounded(g, 0, v, g.num_edges).size for v in g.vertices if v != 0)
    assert size >= true_min
