"""Covering set families.

A family over a universe ``U`` is ``(a, b)``-covering when for every pair of
disjoint sets ``A, B`` with ``|A| <= a`` and ``|B| <= b`` some member ``S``
satisfies ``A <= S`` and ``S & B == {}``.  Every separation finder and every
high-connectivity branching step iterates over such a family.

Four constructions are offered:

* ``exhaustive``: every subset of ``U`` (``|U| <= 20``).
* ``complement``: every ``U - B`` with ``|B| <= b``.  This is the subfamily of
  the exhaustive family that already covers every pair, since ``U - B`` is the
  largest set avoiding ``B``; it is what solvers use when asked for exhaustive
  families on universes too big to enumerate.
* ``perfect-hash``: preimages of bucket sets under ``x -> x mod p`` for a
  collection of primes that injectively hashes every ``(a + b)``-subset.
* ``randomized``: independent draws where each element joins with
  probability ``a / (a + b)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .seeds import derive_seed

MODES = ("exhaustive", "complement", "perfect-hash", "randomized")
EXHAUSTIVE_LIMIT = 20
CHECK_LIMIT = 16
DEFAULT_SIZE_LIMIT = 2_000_000


class FamilySizeError(ValueError):
    """Raised when a requested family (or check) would be too large to build."""


@dataclass(frozen=True)
class FamilySpec:
    universe: Tuple[int, ...]
    a: int
    b: int
    mode: str = "randomized"
    seed: int = 0
    delta: float = 1e-6
    repetitions: Optional[int] = None
    # "pair": each fixed (A, B) is covered with probability >= 1 - delta.
    # "family": all pairs are covered simultaneously with probability >= 1 - delta.
    scope: str = "family"
    size_limit: int = DEFAULT_SIZE_LIMIT

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown family mode {self.mode!r}")
        if self.a < 0 or self.b < 0:
            raise ValueError("a and b must be non-negative")
        if self.scope not in ("pair", "family"):
            raise ValueError(f"unknown scope {self.scope!r}")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")


@dataclass
class SetFamily:
    """An ordered family of subsets of ``universe``.

    Randomized families are generated lazily from their seed, so iterating twice
    yields the same members without keeping them all in memory.
    """

    universe: Tuple[int, ...]
    mode: str
    size: int
    seed: Optional[int] = None
    failure_bound: float = 0.0
    primes: Tuple[int, ...] = ()
    join_probability: Optional[float] = None
    _members: Optional[List[FrozenSet[int]]] = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.size

    def iter_masks(self, chunk: int = 256) -> Iterator[np.ndarray]:
        """Members as boolean arrays aligned with ``universe``."""
        if self._members is not None:
            pos = {x: i for i, x in enumerate(self.universe)}
            for member in self._members:
                mask = np.zeros(len(self.universe), dtype=bool)
                mask[[pos[x] for x in member]] = True
                yield mask
            return
        rng = np.random.default_rng(self.seed)
        left = self.size
        width = len(self.universe)
        while left > 0:
            take = min(chunk, left)
            draws = rng.random((take, width)) < self.join_probability
            left -= take
            yield from draws

    def __iter__(self) -> Iterator[FrozenSet[int]]:
        if self._members is not None:
            yield from self._members
            return
        universe = np.asarray(self.universe, dtype=np.int64)
        for mask in self.iter_masks():
            yield frozenset(universe[mask].tolist())

    def members(self) -> List[FrozenSet[int]]:
        return list(self)

    @property
    def deterministic(self) -> bool:
        return self.mode != "randomized"


def per_draw_success(a: int, b: int) -> float:
    """Probability that one random draw covers a fixed pair with ``|A| = a``, ``|B| = b``."""
    if a == 0 or b == 0:
        return 1.0
    p = a / (a + b)
    return p**a * (1 - p) ** b


def count_pairs(n: int, a: int, b: int) -> int:
    """Number of ordered disjoint pairs ``(A, B)`` of sizes exactly ``min(a, n)`` and ``min(b, n - |A|)``."""
    sa = min(a, n)
    sb = min(b, n - sa)
    return math.comb(n, sa) * math.comb(n - sa, sb)


def randomized_repetitions(n: int, a: int, b: int, delta: float, scope: str = "family") -> int:
    p = per_draw_success(a, b)
    if p >= 1.0:
        return 1
    target = delta if scope == "pair" else delta / max(1, count_pairs(n, a, b))
    return max(1, math.ceil(math.log(1.0 / target) / p))


def _primes_from(start: int) -> Iterator[int]:
    p = max(2, start)
    while True:
        if all(p % d for d in range(2, int(math.isqrt(p)) + 1)):
            yield p
        p += 1


def _hash_primes(n: int, r: int) -> List[int]:
    """Primes, in increasing order from ``r``, until every ``r``-subset of ``1..n`` is injectively hashed."""
    if r <= 1 or n <= 1:
        return [_next_prime(max(2, n + 1))]
    direct = math.comb(n, r) <= 50_000
    pending = list(itertools.combinations(range(1, n + 1), r)) if direct else []
    chosen: List[int] = []
    for p in _primes_from(r):
        chosen.append(p)
        if p > n:
            break
        if direct:
            pending = [x for x in pending if len({v % p for v in x}) < r]
            if not pending:
                break
        elif len(chosen) > r * (r - 1) // 2 * math.log2(n) + 1:
            # Counting bound: an r-subset has at most C(r,2)*log2(n) bad primes.
            break
    return chosen


def _next_prime(x: int) -> int:
    return next(_primes_from(x))


def build_family(spec: FamilySpec) -> SetFamily:
    """Construct an ``(a, b)``-covering family as described by ``spec``."""
    universe = tuple(sorted(set(spec.universe)))
    n = len(universe)
    a, b = min(spec.a, n), min(spec.b, n)
    if spec.mode == "exhaustive":
        if n > EXHAUSTIVE_LIMIT:
            raise FamilySizeError(f"exhaustive family requested on |U| = {n} > {EXHAUSTIVE_LIMIT}")
        members = [
            frozenset(x for i, x in enumerate(universe) if mask >> i & 1) for mask in range(1 << n)
        ]
        return SetFamily(universe, "exhaustive", len(members), _members=members)
    if spec.mode == "complement":
        size = sum(math.comb(n, i) for i in range(b + 1))
        if size > spec.size_limit:
            raise FamilySizeError(f"complement family of size {size} exceeds limit")
        full = frozenset(universe)
        members = [full - frozenset(c) for i in range(b + 1) for c in itertools.combinations(universe, i)]
        return SetFamily(universe, "complement", len(members), _members=members)
    if spec.mode == "perfect-hash":
        return _perfect_hash_family(universe, a, b, spec.size_limit)
    reps = spec.repetitions or randomized_repetitions(n, a, b, spec.delta, spec.scope)
    join = 1.0 if b == 0 else (0.0 if a == 0 else a / (a + b))
    miss = (1.0 - per_draw_success(a, b)) ** reps
    return SetFamily(
        universe,
        "randomized",
        reps,
        seed=spec.seed,
        failure_bound=miss,
        join_probability=join,
    )


def perfect_hash_ceiling(n: int, a: int, b: int) -> int:
    """Upper bound on the perfect-hash family size: (#primes) * sum_i<=a C(max prime, i)."""
    r = min(a + b, n)
    primes = _hash_primes(n, r)
    top = max(primes)
    return len(primes) * sum(math.comb(top, i) for i in range(min(a, top) + 1))


def _perfect_hash_family(universe: Tuple[int, ...], a: int, b: int, limit: int) -> SetFamily:
    n = len(universe)
    if a == 0:
        return SetFamily(universe, "perfect-hash", 1, _members=[frozenset()])
    if b == 0:
        return SetFamily(universe, "perfect-hash", 1, _members=[frozenset(universe)])
    r = min(a + b, n)
    primes = _hash_primes(n, r)
    members: List[FrozenSet[int]] = []
    seen = set()
    for p in primes:
        buckets: dict = {}
        for pos, x in enumerate(universe, start=1):
            buckets.setdefault(pos % p, []).append(x)
        used = sorted(buckets)
        # Emit preimages of every bucket set of size <= a (sizes below a cover
        # the case where padding cannot reach a + b elements).
        for size in range(min(a, len(used)) + 1):
            for chosen in itertools.combinations(used, size):
                member = frozenset(x for c in chosen for x in buckets[c])
                if member not in seen:
                    seen.add(member)
                    members.append(member)
                    if len(members) > limit:
                        raise FamilySizeError("perfect-hash family exceeds size limit")
    return SetFamily(universe, "perfect-hash", len(members), primes=tuple(primes), _members=members)


def covering_check(fam: SetFamily | Iterable[FrozenSet[int]], a: int, b: int, universe: Sequence[int] | None = None) -> bool:
    """Exhaustively decide whether ``fam`` is ``(a, b)``-covering."""
    return not covering_failures(fam, a, b, universe, stop_at_first=True)


def covering_failures(
    fam: SetFamily | Iterable[FrozenSet[int]],
    a: int,
    b: int,
    universe: Sequence[int] | None = None,
    stop_at_first: bool = False,
) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
    """All disjoint ``(A, B)`` (with ``|A| <= a``, ``|B| <= b``) that no member covers."""
    if universe is None:
        if not isinstance(fam, SetFamily):
            raise ValueError("universe is required for a plain iterable of sets")
        universe = fam.universe
    elems = tuple(sorted(set(universe)))
    n = len(elems)
    if n > CHECK_LIMIT:
        raise FamilySizeError(f"covering check refused on |U| = {n} > {CHECK_LIMIT}")
    bit = {x: 1 << i for i, x in enumerate(elems)}
    masks = np.array([sum(bit[x] for x in m) for m in fam], dtype=np.int64)
    bad: List[Tuple[FrozenSet[int], FrozenSet[int]]] = []
    a, b = min(a, n), min(b, n)
    for sa in range(a + 1):
        for A in itertools.combinations(range(n), sa):
            amask = sum(1 << i for i in A)
            rest = [i for i in range(n) if not amask >> i & 1]
            hits_a = (masks & amask) == amask if masks.size else np.zeros(0, dtype=bool)
            for sb in range(min(b, len(rest)) + 1):
                for B in itertools.combinations(rest, sb):
                    bmask = sum(1 << i for i in B)
                    if not np.any(hits_a & ((masks & bmask) == 0)):
                        bad.append((frozenset(elems[i] for i in A), frozenset(elems[i] for i in B)))
                        if stop_at_first:
                            return bad
    return bad


def solver_family(
    universe: Iterable[int],
    a: int,
    b: int,
    mode: str,
    seed: int,
    site: str,
    delta: float,
) -> SetFamily:
    """Family used at a solver branching site.

    ``exhaustive`` falls back to the complement family when the power set is
    larger; both are deterministic covering families.  Randomized families use
    a per-pair failure bound and a seed derived from the site label.
    """
    universe = tuple(sorted(set(universe)))
    n = len(universe)
    if mode == "exhaustive":
        cosmall = sum(math.comb(n, i) for i in range(min(b, n) + 1))
        if n <= EXHAUSTIVE_LIMIT and (1 << n) <= cosmall:
            return build_family(FamilySpec(universe, a, b, "exhaustive"))
        return build_family(FamilySpec(universe, a, b, "complement", size_limit=10**9))
    if mode == "randomized":
        return build_family(
            FamilySpec(universe, a, b, "randomized", seed=derive_seed(seed, site), delta=delta, scope="pair")
        )
    return build_family(FamilySpec(universe, a, b, mode))
