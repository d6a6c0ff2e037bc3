"""Brute-force reference solvers.

These routines deliberately share no search logic with the solvers: they use
their own union-find and label propagation and enumerate candidate deletion
sets in lexicographic order, returning the first witness of minimum size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .instances import MwcuInstance, PartialPermutation, SteinerInstance, UlcInstance
from .graph import MultiGraph

MAX_VERTICES = 12
MAX_K = 4
MAX_S = 4
MAX_CANDIDATES = 2_000_000
MAX_TABLE = 4_000_000


class OracleGuardError(ValueError):
    """Raised when an instance is too large for exhaustive search."""


@dataclass(frozen=True)
class OracleResult:
    """Minimum witness, or ``feasible=False`` after exhausting every candidate."""

    feasible: bool
    solution: Tuple[int, ...] = ()
    labeling: Optional[Dict[int, int]] = None
    exhausted: bool = True

    @property
    def size(self) -> Optional[int]:
        return len(self.solution) if self.feasible else None


# ------------------------------------------------------------------ plumbing
class _UnionFind:
    def __init__(self, items: Iterable[int]) -> None:
        self.up = {x: x for x in items}

    def find(self, x: int) -> int:
        while self.up[x] != x:
            self.up[x] = self.up[self.up[x]]
            x = self.up[x]
        return x

    def join(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.up[max(ra, rb)] = min(ra, rb)


def _edge_list(g: MultiGraph) -> List[Tuple[int, int, int]]:
    return sorted((i, a, b) for (a, b), ids in g.pairs.items() for i in ids)


def _roots(vertices: Iterable[int], edges: Iterable[Tuple[int, int]]) -> Dict[int, int]:
    uf = _UnionFind(vertices)
    for a, b in edges:
        uf.join(a, b)
    return {v: uf.find(v) for v in uf.up}


def _count_subsets(n: int, k: int) -> int:
    return sum(math.comb(n, i) for i in range(min(n, k) + 1))


def _guard(n: int, k: int, candidates: int, what: str) -> None:
    if n > MAX_VERTICES or k > MAX_K:
        raise OracleGuardError(f"{what} oracle limited to n <= {MAX_VERTICES}, k <= {MAX_K}")
    if candidates > MAX_CANDIDATES:
        raise OracleGuardError(f"{what} oracle would enumerate {candidates} sets")


def _subsets(items: Sequence[int], k: int) -> Iterable[Tuple[int, ...]]:
    for size in range(min(k, len(items)) + 1):
        yield from itertools.combinations(items, size)


# --------------------------------------------------------------- steiner cut
def oracle_steiner(inst: SteinerInstance) -> OracleResult:
    g = inst.graph
    edges = _edge_list(g)
    ids = [e[0] for e in edges]
    _guard(len(g), inst.k, _count_subsets(len(ids), inst.k), "steiner")
    if inst.s > MAX_S:
        raise OracleGuardError(f"steiner oracle limited to s <= {MAX_S}")
    for x in _subsets(ids, inst.k):
        drop = set(x)
        root = _roots(g.vertices, ((a, b) for i, a, b in edges if i not in drop))
        if len({root[t] for t in inst.terminals}) >= inst.s:
            return OracleResult(True, tuple(x))
    return OracleResult(False)


# -------------------------------------------------------- multiway cut-uncut
def _classes_respected(root: Mapping[int, int], classes: Mapping[int, int]) -> bool:
    terms = sorted(classes)
    for u, v in itertools.combinations(terms, 2):
        if (root[u] == root[v]) != (classes[u] == classes[v]):
            return False
    return True


def oracle_mwcu_node(inst: MwcuInstance) -> OracleResult:
    g = inst.graph
    blocked = set(inst.classes) | set(inst.undeletable)
    candidates = [v for v in g.vertices if v not in blocked]
    _guard(len(g), inst.k, _count_subsets(len(candidates), inst.k), "node mwcu")
    pairs = list(g.pairs)
    for x in _subsets(candidates, inst.k):
        gone = set(x)
        alive = [v for v in g.vertices if v not in gone]
        root = _roots(alive, ((a, b) for a, b in pairs if a not in gone and b not in gone))
        if _classes_respected(root, inst.classes):
            return OracleResult(True, tuple(x))
    return OracleResult(False)


def oracle_mwcu_edge(inst: MwcuInstance) -> OracleResult:
    g = inst.graph
    edges = _edge_list(g)
    ids = [e[0] for e in edges]
    _guard(len(g), inst.k, _count_subsets(len(ids), inst.k), "edge mwcu")
    for x in _subsets(ids, inst.k):
        drop = set(x)
        root = _roots(g.vertices, ((a, b) for i, a, b in edges if i not in drop))
        if _classes_respected(root, inst.classes):
            return OracleResult(True, tuple(x))
    return OracleResult(False)


# ------------------------------------------------------------ label cover
def _label_rest(
    inst: UlcInstance, alive: Sequence[int], live_pairs: Sequence[Tuple[int, int]]
) -> Optional[Dict[int, int]]:
    """A labeling of ``alive`` satisfying every live constraint, trying anchors' labels in order."""
    adj: Dict[int, List[int]] = {v: [] for v in alive}
    for a, b in live_pairs:
        adj[a].append(b)
        adj[b].append(a)
    labels: Dict[int, int] = {}
    for anchor in sorted(alive):
        if anchor in labels:
            continue
        found = None
        for alpha in sorted(inst.domain(anchor)):
            trial = {anchor: alpha}
            stack = [anchor]
            ok = True
            while stack and ok:
                v = stack.pop()
                for w in adj[v]:
                    image = inst.psi(v, w)(trial[v])
                    if image is None or image not in inst.domain(w):
                        ok = False
                        break
                    if w in trial:
                        if trial[w] != image:
                            ok = False
                            break
                    else:
                        trial[w] = image
                        stack.append(w)
            if ok:
                found = trial
                break
        if found is None:
            return None
        labels.update(found)
    return labels


def oracle_ulc_node(inst: UlcInstance) -> OracleResult:
    g = inst.graph
    verts = list(g.vertices)
    _guard(len(g), inst.k, _count_subsets(len(verts), inst.k), "node ulc")
    pairs = list(g.pairs)
    for x in _subsets(verts, inst.k):
        gone = set(x)
        alive = [v for v in verts if v not in gone]
        live = [(a, b) for a, b in pairs if a not in gone and b not in gone]
        labels = _label_rest(inst, alive, live)
        if labels is not None:
            return OracleResult(True, tuple(x), labels)
    return OracleResult(False)


def _ulc_edge_enumerate(inst: UlcInstance) -> OracleResult:
    g = inst.graph
    edges = _edge_list(g)
    ids = [e[0] for e in edges]
    for x in _subsets(ids, inst.k):
        drop = set(x)
        live = [(a, b) for i, a, b in edges if i not in drop]
        labels = _label_rest(inst, list(g.vertices), live)
        if labels is not None:
            return OracleResult(True, tuple(x), labels)
    return OracleResult(False)


def min_violations(inst: UlcInstance) -> Tuple[float, Dict[int, int]]:
    """Minimum number of violated edge constraints over all list-respecting labelings.

    Exact min-sum variable elimination with a min-degree order; every parallel
    copy of a pair counts separately.  Returns ``(inf, {})`` when some list is empty.
    """
    g = inst.graph
    sigma = inst.sigma
    inf = math.inf
    factors: List[Tuple[Tuple[int, ...], np.ndarray]] = []
    for v in g.vertices:
        unary = np.full(sigma, inf)
        for a in inst.domain(v):
            unary[a] = 0.0
        factors.append(((v,), unary))
    for (u, v), ids in g.pairs.items():
        table = np.full((sigma, sigma), float(len(ids)))
        for a, b in inst.psi(u, v):
            table[a, b] = 0.0
        factors.append(((u, v), table))
    order: List[int] = []
    remaining = set(g.vertices)
    eliminated: List[Tuple[int, Tuple[int, ...], np.ndarray]] = []
    while remaining:
        scope_of: Dict[int, Set[int]] = {v: set() for v in remaining}
        for scope, _ in factors:
            for v in scope:
                scope_of[v].update(scope)
        var = min(sorted(remaining), key=lambda v: len(scope_of[v]))
        mine = [f for f in factors if var in f[0]]
        factors = [f for f in factors if var not in f[0]]
        scope = tuple(sorted(set().union(*(set(s) for s, _ in mine))))
        if sigma ** len(scope) > MAX_TABLE:
            raise OracleGuardError("elimination table too large")
        total = np.zeros((sigma,) * len(scope))
        for fscope, table in mine:
            axes = [scope.index(x) for x in fscope]
            shape = [1] * len(scope)
            for ax, size in zip(axes, table.shape):
                shape[ax] = size
            perm = np.argsort(axes)
            total = total + np.transpose(table, perm).reshape(shape)
        pos = scope.index(var)
        eliminated.append((var, scope, total))
        reduced = total.min(axis=pos)
        rest = tuple(x for x in scope if x != var)
        factors.append((rest, reduced))
        remaining.discard(var)
        order.append(var)
    best = float(sum(np.asarray(t).reshape(()) for s, t in factors if not s))
    if best == inf:
        return inf, {}
    labels: Dict[int, int] = {}
    for var, scope, total in reversed(eliminated):
        index = tuple(labels[x] if x != var else slice(None) for x in scope)
        labels[var] = int(np.argmin(total[index]))
    return best, labels


def oracle_ulc_edge(inst: UlcInstance, method: str = "auto") -> OracleResult:
    """Edge ULC oracle.

    ``enumerate`` searches deletion sets lexicographically; ``eliminate`` uses
    the fact that the optimum deletion set is exactly the violated edges of a
    best labeling.  ``auto`` enumerates when that is cheap.
    """
    g = inst.graph
    count = _count_subsets(g.num_edges, inst.k)
    if method == "auto":
        method = "enumerate" if count <= 20_000 else "eliminate"
    if method == "enumerate":
        if count > MAX_CANDIDATES:
            raise OracleGuardError(f"edge ulc oracle would enumerate {count} sets")
        return _ulc_edge_enumerate(inst)
    if method != "eliminate":
        raise ValueError(f"unknown method {method!r}")
    best, labels = min_violations(inst)
    if best > inst.k:
        return OracleResult(False)
    cut = []
    for (u, v), ids in g.pairs.items():
        if (labels[u], labels[v]) not in inst.psi(u, v):
            cut.extend(ids)
    return OracleResult(True, tuple(sorted(cut)), labels)


# ------------------------------------------------------------- separations
def _check_small(g: MultiGraph) -> None:
    if len(g) > MAX_VERTICES:
        raise OracleGuardError(f"separation oracle limited to {MAX_VERTICES} vertices")


def _connected(vertices: Set[int], g: MultiGraph) -> bool:
    if not vertices:
        return True
    root = _roots(vertices, ((a, b) for a, b in g.pairs if a in vertices and b in vertices))
    return len(set(root.values())) == 1


def has_good_edge_separation(g: MultiGraph, q: int, k: int) -> bool:
    """Some split into two connected sides of more than ``q`` vertices with at most ``k`` crossing edges."""
    _check_small(g)
    verts = list(g.vertices)
    if len(verts) < 2:
        return False
    first, rest = verts[0], verts[1:]
    for mask in range(1 << len(rest)):
        side = {first} | {v for i, v in enumerate(rest) if mask >> i & 1}
        other = set(verts) - side
        if len(side) <= q or len(other) <= q:
            continue
        crossing = sum(len(ids) for (a, b), ids in g.pairs.items() if (a in side) != (b in side))
        if crossing <= k and _connected(side, g) and _connected(other, g):
            return True
    return False


def _components_without(g: MultiGraph, gone: Set[int]) -> List[Set[int]]:
    alive = [v for v in g.vertices if v not in gone]
    root = _roots(alive, ((a, b) for a, b in g.pairs if a not in gone and b not in gone))
    groups: Dict[int, Set[int]] = {}
    for v in alive:
        groups.setdefault(root[v], set()).add(v)
    return list(groups.values())


def has_good_node_separation(g: MultiGraph, undeletable: Iterable[int], q: int, k: int) -> bool:
    """Some ``Z`` of at most ``k`` deletable vertices leaves two components with more than ``q`` deletable vertices."""
    _check_small(g)
    inf = set(undeletable)
    deletable = [v for v in g.vertices if v not in inf]
    for z in _subsets(deletable, k):
        comps = _components_without(g, set(z))
        if sum(1 for c in comps if len(c - inf) > q) >= 2:
            return True
    return False


def has_flower_separation(
    g: MultiGraph, undeletable: Iterable[int], border: Iterable[int], q: int, k: int
) -> bool:
    """Some core ``Z`` with a choice of petals (small, border-free components attached to all of ``Z``)
    whose union and whose complement both have more than ``q`` deletable vertices."""
    _check_small(g)
    inf, tb = set(undeletable), set(border)
    deletable = [v for v in g.vertices if v not in inf]
    for size in range(1, min(k, len(deletable)) + 1):
        for z in itertools.combinations(deletable, size):
            zs = set(z)
            comps = _components_without(g, zs)
            total = sum(len(c - inf) for c in comps)
            petals = []
            for c in comps:
                weight = len(c - inf)
                if weight == 0 or weight > q or c & tb:
                    continue
                touched = {w for v in c for w in g.neighbors(v)} - c
                if touched == zs:
                    petals.append(weight)
            for r in range(1, len(petals) + 1):
                for chosen in itertools.combinations(petals, r):
                    inside = sum(chosen)
                    if inside > q and total - inside > q:
                        return True
    return False


# --------------------------------------------------------------- dp oracle
def steiner_dp_by_subsets(components: Sequence[Tuple[int, int]], length: int) -> Dict[Tuple[int, int, bool], float]:
    """Every cell ``T[j, l, t]`` (``l <= length``) by enumerating all index subsets of each prefix."""
    out: Dict[Tuple[int, int, bool], float] = {}
    p = len(components)
    for j in range(p + 1):
        for ell in range(length + 1):
            for top in (False, True):
                out[(j, ell, top)] = math.inf
        for mask in range(1 << j):
            taken = [i for i in range(j) if mask >> i & 1]
            cost = sum(components[i][0] for i in taken)
            sep = sum(components[i][1] for i in taken)
            left = sum(components[i][1] for i in range(j) if not mask >> i & 1)
            if sep > length:
                continue
            key = (j, sep, left > 0)
            out[key] = min(out[key], cost)
    return out


# ------------------------------------------------------------- clique search
def has_multicolored_clique(adjacency: Iterable[Tuple[Tuple[int, int], Tuple[int, int]]], k: int, n: int) -> bool:
    """Whether picking one vertex ``(part, index)`` per part yields a clique."""
    edges = {frozenset(e) for e in adjacency}
    for choice in itertools.product(range(n), repeat=k):
        picked = [(i, choice[i]) for i in range(k)]
        if all(frozenset((x, y)) in edges for x, y in itertools.combinations(picked, 2)):
            return True
    return False
