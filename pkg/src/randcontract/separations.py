"""Good edge separations, good node separations and flower separations.

All finders iterate a covering family, contract each member and look for a
small cut between large contracted vertices.  Every separation they return is
checked by an independent validator before it leaves this module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .families import SetFamily, solver_family
from .flows import karger_min_cut, min_edge_cut_bounded, min_vertex_cut_bounded
from .graph import (
    EdgeArrays,
    GraphInputError,
    MultiGraph,
    connected_components,
    is_connected,
    merge_partition,
    reachable,
)


@dataclass(frozen=True)
class GoodEdgeSeparation:
    side1: FrozenSet[int]
    side2: FrozenSet[int]
    crossing: FrozenSet[int]


@dataclass(frozen=True)
class GoodNodeSeparation:
    separator: FrozenSet[int]
    side1: FrozenSet[int]
    side2: FrozenSet[int]


@dataclass(frozen=True)
class FlowerSeparation:
    core: FrozenSet[int]
    petals: Tuple[FrozenSet[int], ...]

    def petal_union(self) -> FrozenSet[int]:
        return frozenset().union(*self.petals) if self.petals else frozenset()

    def stalk(self, g: MultiGraph) -> FrozenSet[int]:
        return frozenset(g.vertices) - self.core - self.petal_union()


Separation = GoodEdgeSeparation | GoodNodeSeparation | FlowerSeparation


# ------------------------------------------------------------------ validators
def validate_edge_separation(g: MultiGraph, sep: GoodEdgeSeparation, q: int, k: int) -> bool:
    v1, v2 = set(sep.side1), set(sep.side2)
    if v1 & v2 or v1 | v2 != set(g.vertices):
        return False
    if len(v1) <= q or len(v2) <= q:
        return False
    crossing = {i for (a, b), ids in g.pairs.items() if (a in v1) != (b in v1) for i in ids}
    if crossing != set(sep.crossing) or len(crossing) > k:
        return False
    return is_connected(g, v1) and is_connected(g, v2)


def validate_node_separation(
    g: MultiGraph, sep: GoodNodeSeparation, undeletable: Iterable[int], q: int, k: int
) -> bool:
    inf = set(undeletable)
    z = set(sep.separator)
    if len(z) > k or z & inf:
        return False
    comps = set(connected_components(g, removed_vertices=z))
    if sep.side1 not in comps or sep.side2 not in comps or sep.side1 == sep.side2:
        return False
    return len(sep.side1 - inf) > q and len(sep.side2 - inf) > q


def validate_flower(
    g: MultiGraph, sep: FlowerSeparation, undeletable: Iterable[int], border: Iterable[int], q: int, k: int
) -> bool:
    inf, tb = set(undeletable), set(border)
    z = set(sep.core)
    if not 1 <= len(z) <= k or z & inf:
        return False
    comps = set(connected_components(g, removed_vertices=z))
    if len(set(sep.petals)) != len(sep.petals):
        return False
    for petal in sep.petals:
        if petal not in comps or petal & tb or len(petal - inf) > q:
            return False
        if g.vertex_boundary(petal) != z:
            return False
    if len(sep.petal_union() - inf) <= q:
        return False
    return len(sep.stalk(g) - inf) > q


# ------------------------------------------------------------------ helpers
def _partition_blocks(count: int, labels: np.ndarray, vertices: np.ndarray) -> List[List[int]]:
    order = np.argsort(labels, kind="stable")
    blocks: List[List[int]] = [[] for _ in range(count)]
    for pos in order:
        blocks[labels[pos]].append(int(vertices[pos]))
    return blocks


def _require_connected(g: MultiGraph) -> None:
    if len(g) and not is_connected(g):
        raise GraphInputError("separation finders need a connected graph")


def edge_family(g: MultiGraph, a: int, b: int, mode: str, seed: int, site: str, delta: float) -> SetFamily:
    return solver_family(g.edge_ids(), a, b, mode, seed, site, delta)


# ------------------------------------------------------------- edge finders
def find_good_edge_separation(
    g: MultiGraph,
    q: int,
    k: int,
    family_mode: str = "exhaustive",
    seed: int = 0,
    delta: float = 1e-6,
    stats: Optional[Dict[str, int]] = None,
) -> Optional[GoodEdgeSeparation]:
    """A ``(q, k)``-good edge separation, or ``None`` when the family finds none.

    ``None`` is exact for deterministic family modes.
    """
    _require_connected(g)
    if len(g) < 2 * (q + 1):
        return None
    arrays = EdgeArrays(g)
    family = edge_family(g, 2 * q, k, family_mode, seed, "edge-separation", delta)
    seen: Set[bytes] = set()
    for mask in _aligned_masks(family, arrays):
        count, labels = arrays.labels(mask)
        key = labels.astype(np.int32).tobytes()
        if key in seen:
            continue
        seen.add(key)
        blocks = _partition_blocks(count, labels, arrays.vertices)
        heavy = [blk for blk in blocks if len(blk) > q]
        if len(heavy) < 2:
            continue
        h, iota = merge_partition(g, blocks)
        images = sorted({iota[blk[0]] for blk in heavy})
        for u1, u2 in itertools.combinations(images, 2):
            if stats is not None:
                stats["flow_calls"] = stats.get("flow_calls", 0) + 1
            res = min_edge_cut_bounded(h, u1, u2, k)
            if res.exceeds:
                continue
            w1 = min(v for v in g.vertices if iota[v] == u1)
            side1 = frozenset(reachable(g, w1, res.cut))
            sep = GoodEdgeSeparation(side1, frozenset(g.vertices) - side1, frozenset(res.cut))
            if validate_edge_separation(g, sep, q, k):
                return sep
    return None


def _aligned_masks(family: SetFamily, arrays: EdgeArrays):
    """Family members as masks over ``arrays.edge_ids`` (the family universe is the same id list)."""
    universe = np.asarray(family.universe, dtype=np.int64)
    if len(universe) == len(arrays.edge_ids) and np.array_equal(universe, arrays.edge_ids):
        yield from family.iter_masks()
        return
    pos = {int(e): i for i, e in enumerate(arrays.edge_ids)}
    idx = np.asarray([pos[int(e)] for e in universe], dtype=np.int64)
    for m in family.iter_masks():
        full = np.zeros(len(arrays.edge_ids), dtype=bool)
        full[idx[m]] = True
        yield full


def find_good_edge_separation_randomized(
    g: MultiGraph,
    q: int,
    k: int,
    seed: int,
    delta: float = 1e-6,
    stats: Optional[Dict[str, int]] = None,
) -> Optional[GoodEdgeSeparation]:
    """Monte Carlo edge separation finder based on Karger contraction.

    After contracting a family member, every edge with a small endpoint is
    contracted too, so any cut of the remaining graph of size at most ``k``
    separates two large connected sides.
    """
    _require_connected(g)
    if len(g) < 2 * (q + 1):
        return None
    arrays = EdgeArrays(g)
    # One tree of q edges around each of the at most 2k endpoints of the cut.
    a = 2 * q * max(1, k)
    family = edge_family(g, a, k, "randomized", seed, "edge-separation-karger", delta)
    seen: Set[bytes] = set()
    for index, mask in enumerate(_aligned_masks(family, arrays)):
        count, labels = arrays.labels(mask)
        sizes = np.bincount(labels, minlength=count)
        small = sizes[labels] <= q
        extra = small[arrays.src] | small[arrays.dst]
        count2, labels2 = arrays.labels(mask | extra)
        if count2 < 2:
            continue
        key = labels2.astype(np.int32).tobytes()
        if key in seen:
            continue
        seen.add(key)
        blocks = _partition_blocks(count2, labels2, arrays.vertices)
        h, iota = merge_partition(g, blocks)
        n_h = len(h)
        trials = max(1, math.ceil(n_h * (n_h - 1) / 2 * math.log(1.0 / delta)))
        trials = min(trials, 2000)
        if stats is not None:
            stats["karger_calls"] = stats.get("karger_calls", 0) + 1
        size, cut = karger_min_cut(h, trials, seed=seed * 1_000_003 + index)
        if size == 0 or size > k:
            continue
        w1 = min(g.endpoints(next(iter(cut))))
        side1 = frozenset(reachable(g, w1, cut))
        sep = GoodEdgeSeparation(side1, frozenset(g.vertices) - side1, frozenset(cut))
        if validate_edge_separation(g, sep, q, k):
            return sep
    return None


# -------------------------------------------------------------- node finders
def _contract_inside(
    g: MultiGraph, arrays: EdgeArrays, keep: np.ndarray
) -> Tuple[MultiGraph, Dict[int, int], List[List[int]]]:
    count, labels = arrays.vertex_labels(keep)
    blocks = _partition_blocks(count, labels, arrays.vertices)
    h, iota = merge_partition(g, blocks)
    return h, iota, blocks


def find_good_node_separation(
    g: MultiGraph,
    undeletable: Iterable[int],
    q: int,
    k: int,
    family_mode: str = "exhaustive",
    seed: int = 0,
    delta: float = 1e-6,
    stats: Optional[Dict[str, int]] = None,
) -> Optional[GoodNodeSeparation]:
    """A ``(q, k)``-good node separation avoiding ``undeletable``, or ``None``."""
    _require_connected(g)
    inf = set(undeletable)
    deletable = [v for v in g.vertices if v not in inf]
    if len(deletable) < 2 * (q + 1):
        return None
    arrays = EdgeArrays(g)
    family = solver_family(deletable, 2 * q + 2, k, family_mode, seed, "node-separation", delta)
    is_inf = np.array([v in inf for v in g.vertices], dtype=bool)
    pos = arrays.position
    seen: Set[bytes] = set()
    for member in family:
        keep = is_inf.copy()
        keep[[pos[v] for v in member]] = True
        key = np.packbits(keep).tobytes()
        if key in seen:
            continue
        seen.add(key)
        h, iota, blocks = _contract_inside(g, arrays, keep)
        marked = {iota[v] for v in g.vertices if keep[pos[v]]}
        weight: Dict[int, int] = {}
        for v in g.vertices:
            if v not in inf:
                weight[iota[v]] = weight.get(iota[v], 0) + 1
        big = sorted(u for u in marked if weight.get(u, 0) > q)
        for u1, u2 in itertools.combinations(big, 2):
            if stats is not None:
                stats["flow_calls"] = stats.get("flow_calls", 0) + 1
            res = min_vertex_cut_bounded(h, u1, u2, k, forbidden=marked - {u1, u2})
            if res.exceeds:
                continue
            z = frozenset(res.cut)
            w1 = min(v for v in g.vertices if iota[v] == u1 and v not in inf)
            w2 = min(v for v in g.vertices if iota[v] == u2 and v not in inf)
            comps = connected_components(g, removed_vertices=z)
            c1 = next(c for c in comps if w1 in c)
            c2 = next(c for c in comps if w2 in c)
            sep = GoodNodeSeparation(z, c1, c2)
            if validate_node_separation(g, sep, inf, q, k):
                return sep
    return None


def flower_with_core(
    g: MultiGraph,
    undeletable: Iterable[int],
    border: Iterable[int],
    q: int,
    k: int,
    core: Iterable[int],
) -> Optional[FlowerSeparation]:
    """Decide whether ``core`` is the core of a flower separation; return one if so.

    Petals are picked by a subset-sum table over the components of ``G - core``
    counting vertices outside ``undeletable``.
    """
    inf, tb = set(undeletable), set(border)
    z = frozenset(core)
    if not 1 <= len(z) <= k or z & inf:
        return None
    comps = connected_components(g, removed_vertices=z)
    total = sum(1 for v in g.vertices if v not in inf and v not in z)
    lo, hi = q + 1, total - q - 1
    if lo > hi:
        return None
    eligible: List[Tuple[FrozenSet[int], int]] = []
    for c in comps:
        w = len(c - inf)
        if w == 0 or w > q or c & tb:
            continue
        if g.vertex_boundary(c) != z:
            continue
        eligible.append((c, w))
    # reach[j][s]: some subset of the first j eligible components weighs s.
    reach = [[False] * (hi + 1) for _ in range(len(eligible) + 1)]
    reach[0][0] = True
    for j, (_, w) in enumerate(eligible, start=1):
        prev, cur = reach[j - 1], reach[j]
        for s in range(hi + 1):
            cur[s] = prev[s] or (s >= w and prev[s - w])
    last = reach[len(eligible)]
    target = next((s for s in range(lo, hi + 1) if last[s]), None)
    if target is None:
        return None
    petals: List[FrozenSet[int]] = []
    s = target
    for j in range(len(eligible), 0, -1):
        if reach[j - 1][s]:
            continue
        c, w = eligible[j - 1]
        petals.append(c)
        s -= w
    petals.sort(key=min)
    return FlowerSeparation(z, tuple(petals))


def find_flower_separation(
    g: MultiGraph,
    undeletable: Iterable[int],
    border: Iterable[int],
    q: int,
    k: int,
    family_mode: str = "exhaustive",
    seed: int = 0,
    delta: float = 1e-6,
    stats: Optional[Dict[str, int]] = None,
) -> Optional[FlowerSeparation]:
    """A ``(q, k)``-flower separation with respect to ``border``, or ``None``."""
    _require_connected(g)
    inf, tb = set(undeletable), set(border)
    deletable = [v for v in g.vertices if v not in inf]
    if len(deletable) < 2 * (q + 1) or k < 1:
        return None
    arrays = EdgeArrays(g)
    family = solver_family(deletable, q, k, family_mode, seed, "flower-separation", delta)
    is_inf = np.array([v in inf for v in g.vertices], dtype=bool)
    pos = arrays.position
    tried: Set[FrozenSet[int]] = set()
    seen: Set[bytes] = set()
    for member in family:
        keep = is_inf.copy()
        keep[[pos[v] for v in member]] = True
        key = np.packbits(keep).tobytes()
        if key in seen:
            continue
        seen.add(key)
        h, iota, blocks = _contract_inside(g, arrays, keep)
        pre: Dict[int, List[int]] = {}
        for v in g.vertices:
            if keep[pos[v]]:
                pre.setdefault(iota[v], []).append(v)
        for u in sorted(pre):
            if sum(1 for v in pre[u] if v not in inf) > q:
                continue
            z = frozenset(h.neighbors(u))
            if not 1 <= len(z) <= k or z in tried:
                continue
            tried.add(z)
            if stats is not None:
                stats["core_tests"] = stats.get("core_tests", 0) + 1
            sep = flower_with_core(g, inf, tb, q, k, z)
            if sep is not None and validate_flower(g, sep, inf, tb, q, k):
                return sep
    return None


# ------------------------------------------------------- structural diagnostics
def component_bound(q: int, k: int, border_size: int) -> int:
    return (2 * q + 2) * (2**k - 1) + border_size + 1


def check_structure_bound(
    g: MultiGraph, undeletable: Iterable[int], border: Iterable[int], q: int, k: int
) -> bool:
    """Exhaustively verify the component bounds that hold when no node or flower separation exists.

    For every deletable ``Z`` with ``|Z| <= k``: ``G - Z`` has at most
    ``(2q+2)(2^k-1) + |T_b| + 1`` components with a deletable vertex, and at most
    one of them has more than ``q`` deletable vertices.
    """
    if len(g) > 12:
        raise ValueError("structure check is limited to 12 vertices")
    inf = set(undeletable)
    limit = component_bound(q, k, len(set(border)))
    deletable = [v for v in g.vertices if v not in inf]
    for size in range(min(k, len(deletable)) + 1):
        for z in itertools.combinations(deletable, size):
            comps = [c for c in connected_components(g, removed_vertices=z) if c - inf]
            if len(comps) > limit:
                return False
            if sum(1 for c in comps if len(c - inf) > q) > 1:
                return False
    return True


def check_edge_structure(g: MultiGraph, q: int, k: int) -> bool:
    """Exhaustively verify: removing at most ``k`` edges leaves at most ``k + 1`` components,
    at most one of which has more than ``q`` vertices."""
    if len(g) > 12:
        raise ValueError("structure check is limited to 12 vertices")
    ids = g.edge_ids()
    base = len(connected_components(g))
    for size in range(min(k, len(ids)) + 1):
        for f in itertools.combinations(ids, size):
            comps = connected_components(g.remove_edges(f))
            if len(comps) - base > size:
                return False
            if len(comps) > k + 1:
                return False
            if sum(1 for c in comps if len(c) > q) > 1:
                return False
    return True
