from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from randcontract.config import NO, YES, SolverConfig
from randcontract.graph import MultiGraph
from randcontract.instances import SteinerInstance, steiner_valid
from randcontract.oracles import oracle_steiner, steiner_dp_by_subsets
from randcontract.steiner import (
    SteinerBehavior,
    realized_behavior,
    satisfies,
    set_partitions,
    solve_border_steiner,
    solve_steiner,
    steiner_behaviors,
    steiner_dp,
    steiner_dp_extract,
    transform_behavior,
)

from _util import cycle, multigraphs, path

CONFIGS = [SolverConfig(), SolverConfig(q_override=1), SolverConfig(mode="bruteforce")]


def inst(g, terminals, s, k):
    return SteinerInstance(g, frozenset(terminals), s, k)


@pytest.mark.parametrize("cfg", CONFIGS)
def test_path_one_edge(cfg):
    rep = solve_steiner(inst(path(3), {0, 2}, 2, 1), cfg)
    assert rep.answer == YES and rep.size == 1


@pytest.mark.parametrize("cfg", CONFIGS)
def test_c4_opposite_terminals(cfg):
    assert solve_steiner(inst(cycle(4), {0, 2}, 2, 1), cfg).answer == NO
    rep = solve_steiner(inst(cycle(4), {0, 2}, 2, 2), cfg)
    assert rep.answer == YES and rep.size == 2


@pytest.mark.parametrize("cfg", CONFIGS)
def test_star_three_terminal_leaves(cfg):
    star = MultiGraph.from_edges(range(4), [(0, 1), (0, 2), (0, 3)])
    rep = solve_steiner(inst(star, {1, 2, 3}, 3, 2), cfg)
    assert rep.answer == YES and rep.size == 2
    assert solve_steiner(inst(star, {1, 2, 3}, 3, 1), cfg).answer == NO


def test_already_separated_needs_nothing():
    g = MultiGraph.from_edges(range(4), [(0, 1), (2, 3)])
    rep = solve_steiner(inst(g, {0, 2}, 2, 0))
    assert rep.answer == YES and rep.solution == []


def test_disconnected_instance_uses_gadget():
    g = MultiGraph.from_edges(range(6), [(0, 1), (1, 2), (3, 4), (4, 5)])
    rep = solve_steiner(inst(g, {0, 2, 3}, 3, 1))
    assert rep.answer == YES and rep.size == 1
    assert steiner_valid(inst(g, {0, 2, 3}, 3, 1), rep.solution)


def test_report_is_deterministic_json():
    i = inst(cycle(6), {0, 3}, 2, 2)
    assert solve_steiner(i).to_json() == solve_steiner(i).to_json()


# --------------------------------------------------------------- border problem
def test_empty_border_matches_plain_problem():
    g = cycle(5)
    res = solve_border_steiner(g, {0, 2}, 2, ())
    best = min((len(c) for b, c in res.items() if b.s >= 2 and c is not None), default=None)
    assert best == oracle_steiner(inst(g, {0, 2}, 2, 2)).size == 2


def test_two_vertex_split_infeasible_over_budget():
    g = MultiGraph.from_edges([0, 1], [(0, 1)] * 3)
    split = SteinerBehavior(((0,), (1,)), frozenset({0, 1}), 2)
    assert solve_border_steiner(g, {0, 1}, 2, {0, 1})[split] is None
    assert solve_border_steiner(g, {0, 1}, 3, {0, 1})[split] is not None


def test_all_connected_behavior_with_zero_budget():
    g = path(4)
    res = solve_border_steiner(g, {0, 3}, 1, {1, 2})
    together = SteinerBehavior(((1, 2),), frozenset({1, 2}), 1)
    assert res[together] == frozenset()


def test_behavior_enumeration_counts():
    bell = [1, 1, 2, 5, 15]
    for n in range(5):
        assert len(set_partitions(range(n))) == bell[n]
    assert len(steiner_behaviors((), 2)) == 4
    # {12} with 2 alive choices, {1}{2} with 4, each with s in 0..k+1
    assert len(steiner_behaviors((1, 2), 1)) == (2 + 4) * 3


def test_transform_behavior_rejects_merge():
    beh = SteinerBehavior(((0,), (1,)), frozenset(), 1)
    assert transform_behavior(beh, {0: 5, 1: 5}) is None
    assert transform_behavior(beh, {0: 5, 1: 6}) == SteinerBehavior(((5,), (6,)), frozenset(), 1)


def brute_border(g, terminals, k, border):
    out = {b: None for b in steiner_behaviors(border, k)}
    for size in range(k + 1):
        for cut in itertools.combinations(g.edge_ids(), size):
            beh = realized_behavior(g, terminals, border, cut)
            if beh in out and out[beh] is None:
                out[beh] = size
    return out


@settings(max_examples=40)
@given(multigraphs(min_n=2, max_n=7, max_mult=2, connected=True), st.integers(0, 2), st.data())
def test_border_solver_matches_brute_force(g, k, data):
    verts = list(g.vertices)
    terminals = set(data.draw(st.lists(st.sampled_from(verts), min_size=1, unique=True, max_size=4)))
    border = set(data.draw(st.lists(st.sampled_from(verts), unique=True, max_size=min(2, 2 * k))))
    q = data.draw(st.sampled_from([1, 2, None]))
    res = solve_border_steiner(g, terminals, k, border, q=q)
    ref = brute_border(g, terminals, k, border)
    for beh, size in ref.items():
        got = res.get(beh)
        assert (got is None) == (size is None)
        if got is not None:
            assert len(got) == size and satisfies(g, terminals, border, k, beh, got)


# ---------------------------------------------------------------- dp table
def test_dp_base_cells():
    table = steiner_dp([], 3)
    assert table[0][0][0] == 0
    assert all(table[0][ell][t] == math.inf for ell in range(1, 4) for t in (0, 1))


def test_dp_two_pieces():
    table = steiner_dp([(1, 1), (2, 1)], 1)
    assert table[2][1][1] == 1 and table[2][1][0] == math.inf
    assert steiner_dp_extract(table, [(1, 1), (2, 1)], 1, 1) == [0]


def test_dp_all_terminal_pieces_bottom_forces_everything():
    comps = [(1, 1), (2, 1), (1, 2)]
    table = steiner_dp(comps, 4)
    assert table[3][4][0] == 4
    assert steiner_dp_extract(table, comps, 4, 0) == [0, 1, 2]


pieces = st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3)), max_size=7)


@given(pieces, st.integers(0, 6))
def test_dp_matches_subset_enumeration(comps, length):
    table = steiner_dp(comps, length)
    ref = steiner_dp_by_subsets(comps, length)
    for (j, ell, top), value in ref.items():
        assert table[j][ell][int(top)] == value
    for top in (0, 1):
        chosen = steiner_dp_extract(table, comps, length, top)
        if chosen is None:
            assert table[len(comps)][length][top] == math.inf
        else:
            assert sum(comps[i][0] for i in chosen) == table[len(comps)][length][top]
            assert sum(comps[i][1] for i in chosen) == length


# ---------------------------------------------------------- full solver vs oracle
@settings(max_examples=40)
@given(multigraphs(min_n=1, max_n=8, max_mult=2), st.integers(0, 3), st.integers(1, 4), st.data())
def test_solver_matches_oracle(g, k, s, data):
    verts = list(g.vertices)
    terminals = data.draw(st.lists(st.sampled_from(verts), min_size=1, unique=True, max_size=5))
    i = inst(g, terminals, s, k)
    ref = oracle_steiner(i)
    for cfg in CONFIGS[:2]:
        rep = solve_steiner(i, cfg)
        assert (rep.answer == YES) == ref.feasible
        if ref.feasible:
            assert rep.size == ref.size and steiner_valid(i, rep.solution)
