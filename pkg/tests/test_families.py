from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from randcontract.families import (
    FamilySizeError,
    FamilySpec,
    SetFamily,
    build_family,
    count_pairs,
    covering_check,
    covering_failures,
    per_draw_success,
    perfect_hash_ceiling,
    randomized_repetitions,
    solver_family,
)


def covers(members, a, b, universe):
    """Independent reference: every disjoint (A, B) has a member containing A and avoiding B."""
    members = [frozenset(m) for m in members]
    for sa in range(a + 1):
        for A in itertools.combinations(universe, sa):
            rest = [x for x in universe if x not in A]
            for sb in range(min(b, len(rest)) + 1):
                for B in itertools.combinations(rest, sb):
                    if not any(set(A) <= m and not (set(B) & m) for m in members):
                        return False
    return True


@pytest.mark.parametrize("mode", ["exhaustive", "perfect-hash", "randomized", "complement"])
def test_a_zero_needs_only_the_empty_set(mode):
    fam = build_family(FamilySpec((1, 2, 3, 4), 0, 2, mode, seed=1, delta=1e-3))
    assert covering_check(fam, 0, 2)
    assert covering_check([frozenset()], 0, 2, universe=(1, 2, 3, 4))


def test_two_singletons_cover_pairs_on_two_elements():
    fam = [frozenset({1}), frozenset({2})]
    assert covers(fam, 1, 1, (1, 2))
    assert covering_check(fam, 1, 1, universe=(1, 2))


def test_covering_check_examples():
    assert covering_check([frozenset()], 0, 3, universe=(1, 2, 3))
    assert not covering_check([frozenset({1})], 1, 1, universe=(1, 2))
    assert covering_failures([frozenset({1})], 1, 1, universe=(1, 2), stop_at_first=True) == [(frozenset(), frozenset({1}))]


def test_randomized_six_elements_rarely_fails():
    fails = 0
    for seed in range(1000):
        fam = build_family(FamilySpec(tuple(range(6)), 2, 2, "randomized", seed=seed, delta=1e-3))
        fails += not covering_check(fam, 2, 2)
    assert fails <= 10


@pytest.mark.parametrize("n", [1, 4, 7, 10])
def test_exhaustive_always_covers(n):
    fam = build_family(FamilySpec(tuple(range(n)), 3, 3, "exhaustive"))
    assert len(fam) == 2**n
    assert covering_check(fam, 3, 3)


def test_size_guards():
    with pytest.raises(FamilySizeError):
        build_family(FamilySpec(tuple(range(21)), 1, 1, "exhaustive"))
    fam = build_family(FamilySpec(tuple(range(17)), 1, 1, "randomized", seed=0))
    with pytest.raises(FamilySizeError):
        covering_check(fam, 1, 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        FamilySpec((1,), 1, 1, "magic")
    with pytest.raises(ValueError):
        FamilySpec((1,), -1, 1)
    with pytest.raises(ValueError):
        FamilySpec((1,), 1, 1, delta=0)


def test_per_draw_success_matches_formula():
    assert per_draw_success(0, 3) == 1.0
    assert per_draw_success(2, 2) == pytest.approx(0.5**4)
    assert per_draw_success(1, 2) == pytest.approx((1 / 3) * (2 / 3) ** 2)


def test_repetitions_meet_target():
    n, a, b, delta = 8, 2, 2, 1e-3
    reps = randomized_repetitions(n, a, b, delta, scope="pair")
    assert (1 - per_draw_success(a, b)) ** reps <= delta
    reps_all = randomized_repetitions(n, a, b, delta, scope="family")
    assert (1 - per_draw_success(a, b)) ** reps_all * count_pairs(n, a, b) <= delta


def test_randomized_family_is_reproducible():
    spec = FamilySpec(tuple(range(9)), 2, 3, "randomized", seed=42, delta=1e-2)
    assert build_family(spec).members() == build_family(spec).members()
    other = FamilySpec(tuple(range(9)), 2, 3, "randomized", seed=43, delta=1e-2)
    assert build_family(spec).members() != build_family(other).members()


def test_solver_family_exhaustive_switches_to_complement():
    fam = solver_family(range(12), 5, 1, "exhaustive", 0, "site", 1e-6)
    assert fam.mode == "complement" and len(fam) == 13
    assert covering_check(fam, 5, 1)


@given(st.integers(1, 8), st.integers(0, 3), st.integers(0, 3))
def test_perfect_hash_covers_and_respects_ceiling(n, a, b):
    fam = build_family(FamilySpec(tuple(range(100, 100 + n)), a, b, "perfect-hash"))
    assert isinstance(fam, SetFamily) and fam.deterministic
    assert covering_check(fam, a, b)
    assert len(fam) <= perfect_hash_ceiling(n, min(a, n), min(b, n))
    assert all(m <= set(fam.universe) for m in fam)


@given(st.integers(1, 7), st.integers(0, 2), st.integers(0, 2))
def test_covering_check_agrees_with_reference(n, a, b):
    fam = build_family(FamilySpec(tuple(range(n)), a, b, "randomized", seed=n * 7 + a, repetitions=3))
    assert covering_check(fam, a, b) == covers(fam.members(), a, b, tuple(range(n)))
