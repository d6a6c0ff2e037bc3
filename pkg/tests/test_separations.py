from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from randcontract.graph import MultiGraph
from randcontract.oracles import has_flower_separation, has_good_edge_separation, has_good_node_separation
from randcontract.separations import (
    FlowerSeparation,
    GoodEdgeSeparation,
    check_edge_structure,
    check_structure_bound,
    find_flower_separation,
    find_good_edge_separation,
    find_good_edge_separation_randomized,
    find_good_node_separation,
    flower_with_core,
    validate_edge_separation,
    validate_flower,
    validate_node_separation,
)

from _util import complete, multigraphs, path


def two_k4_bridge() -> MultiGraph:
    left = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    right = [(a + 4, b + 4) for a, b in left]
    return MultiGraph.from_edges(range(8), left + right + [(3, 4)])


def two_k4_through_z() -> MultiGraph:
    # z = 0 belongs to both cliques {0,1,2,3} and {0,4,5,6}
    edges = [(a, b) for grp in ((0, 1, 2, 3), (0, 4, 5, 6)) for i, a in enumerate(grp) for b in grp[i + 1:]]
    return MultiGraph.from_edges(range(7), edges)


def star_with_tail() -> MultiGraph:
    # center 0, leaves 1..3, tail 0-4-5
    return MultiGraph.from_edges(range(6), [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)])


EDGE_CASES = [
    (two_k4_bridge(), 2, 1, True),
    (complete(7), 2, 2, False),
    (path(7), 2, 1, True),
]


@pytest.mark.parametrize("g,q,k,expected", EDGE_CASES)
def test_edge_finder_examples(g, q, k, expected):
    sep = find_good_edge_separation(g, q, k)
    assert (sep is not None) == expected == has_good_edge_separation(g, q, k)
    if sep is not None:
        assert validate_edge_separation(g, sep, q, k)


def test_bridge_partition_is_four_four():
    sep = find_good_edge_separation(two_k4_bridge(), 2, 1)
    assert {sep.side1, sep.side2} == {frozenset(range(4)), frozenset(range(4, 8))}


@pytest.mark.parametrize("g,q,k,expected", EDGE_CASES)
def test_randomized_edge_finder_examples(g, q, k, expected):
    found = 0
    for seed in range(100):
        sep = find_good_edge_separation_randomized(g, q, k, seed, delta=1e-3)
        if sep is not None:
            assert validate_edge_separation(g, sep, q, k)
            found += 1
    assert found >= 99 if expected else found == 0


def test_edge_validator_rejects_bad_sides():
    g = path(4)
    assert not validate_edge_separation(g, GoodEdgeSeparation(frozenset({0, 2}), frozenset({1, 3}), frozenset()), 0, 3)
    assert validate_edge_separation(g, GoodEdgeSeparation(frozenset({0, 1}), frozenset({2, 3}), frozenset({1})), 1, 1)


def test_node_finder_examples():
    g = two_k4_through_z()
    sep = find_good_node_separation(g, (), 2, 1)
    assert sep is not None and sep.separator == frozenset({0})
    assert validate_node_separation(g, sep, (), 2, 1)
    assert find_good_node_separation(g, {0}, 2, 1) is None
    assert not has_good_node_separation(g, {0}, 2, 1)
    assert find_good_node_separation(complete(5), (), 1, 2) is None
    assert not has_good_node_separation(complete(5), (), 1, 2)


def test_flower_star_with_tail():
    g = star_with_tail()
    sep = find_flower_separation(g, (), (), 1, 1)
    assert sep is not None and sep.core == frozenset({0})
    assert len(sep.petals) >= 2 and sep.petal_union() <= {1, 2, 3}
    assert {4, 5} <= sep.stalk(g)
    assert validate_flower(g, sep, (), (), 1, 1)


def test_flower_avoids_border_leaf():
    g = star_with_tail()
    sep = find_flower_separation(g, (), {1}, 1, 1)
    assert sep is not None and sep.petal_union() == frozenset({2, 3})


def test_flower_on_path_is_none():
    assert find_flower_separation(path(4), (), (), 1, 1) is None
    assert not has_flower_separation(path(4), (), (), 1, 1)


def test_flower_validator_rejects_border_petal():
    g = star_with_tail()
    bad = FlowerSeparation(frozenset({0}), (frozenset({1}), frozenset({2})))
    assert validate_flower(g, bad, (), (), 1, 1)
    assert not validate_flower(g, bad, (), {1}, 1, 1)
    assert flower_with_core(g, (), (), 1, 1, {4}) is None


def test_structure_bound_examples():
    assert check_structure_bound(complete(5), (), (), 1, 2)
    assert check_structure_bound(MultiGraph.from_edges([0], []), (), (), 1, 1)
    # a graph with a node separation breaks the bound
    assert not check_structure_bound(two_k4_through_z(), (), (), 2, 1)
    assert not check_edge_structure(two_k4_bridge(), 2, 1)
    assert check_edge_structure(complete(7), 2, 2)


# ---------------------------------------------------------------- properties
params = st.tuples(st.integers(0, 3), st.integers(0, 3))


@given(multigraphs(min_n=1, max_n=9, connected=True), params)
def test_edge_finder_complete(g, qk):
    q, k = qk
    sep = find_good_edge_separation(g, q, k)
    assert (sep is not None) == has_good_edge_separation(g, q, k)
    if sep is not None:
        assert validate_edge_separation(g, sep, q, k)
    else:
        assert check_edge_structure(g, q, k)


@given(multigraphs(min_n=1, max_n=9, connected=True), params, st.data())
def test_node_finder_complete(g, qk, data):
    q, k = qk
    inf = set(data.draw(st.lists(st.sampled_from(list(g.vertices)), unique=True, max_size=3)))
    sep = find_good_node_separation(g, inf, q, k)
    assert (sep is not None) == has_good_node_separation(g, inf, q, k)
    if sep is not None:
        assert validate_node_separation(g, sep, inf, q, k)


@settings(max_examples=40)
@given(multigraphs(min_n=1, max_n=9, connected=True), params, st.data())
def test_flower_finder_complete(g, qk, data):
    q, k = qk
    verts = list(g.vertices)
    inf = set(data.draw(st.lists(st.sampled_from(verts), unique=True, max_size=2)))
    border = set(data.draw(st.lists(st.sampled_from(verts), unique=True, max_size=2)))
    sep = find_flower_separation(g, inf, border, q, k)
    assert (sep is not None) == has_flower_separation(g, inf, border, q, k)
    if sep is not None:
        assert validate_flower(g, sep, inf, border, q, k)
    elif not has_good_node_separation(g, inf, q, k):
        assert check_structure_bound(g, inf, border, q, k)


@settings(max_examples=25)
@given(multigraphs(min_n=1, max_n=8, connected=True), st.integers(0, 2), st.integers(0, 2), st.integers(0, 10**6))
def test_randomized_edge_finder_sound(g, q, k, seed):
    sep = find_good_edge_separation_randomized(g, q, k, seed, delta=1e-3)
    # a miss is allowed by the Monte Carlo contract, an invalid separation is not
    if sep is not None:
        assert validate_edge_separation(g, sep, q, k)
