"""Random instance generators and the two label cover reductions used for hardness."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .graph import MultiGraph, Pair
from .instances import MwcuInstance, PartialPermutation, SteinerInstance, UlcInstance
from .oracles import (
    has_multicolored_clique,
    oracle_mwcu_edge,
    oracle_mwcu_node,
    oracle_steiner,
    oracle_ulc_edge,
    oracle_ulc_node,
)
from .seeds import derive_seed

__all__ = [
    "MccInstance",
    "build_graph",
    "gen_mcc",
    "gen_mcc_to_eulc",
    "gen_planted_steiner",
    "gen_planted_ulc",
    "gen_random",
    "gen_restrict_ulc",
    "has_multicolored_clique",
    "oracle_mwcu_edge",
    "oracle_mwcu_node",
    "oracle_steiner",
    "oracle_ulc_edge",
    "oracle_ulc_node",
]

PROBLEMS = ("steiner", "emwcu", "nmwcu", "eulc", "nulc")

MccVertex = Tuple[int, int]


def build_graph(n: int, edges: Sequence[Pair]) -> MultiGraph:
    """Graph on ``1..n`` whose ``i``-th listed edge gets id ``i + 1``."""
    pairs: Dict[Pair, List[int]] = {}
    for i, (u, v) in enumerate(edges, start=1):
        if u == v:
            raise ValueError(f"loop at vertex {u}")
        pairs.setdefault((min(u, v), max(u, v)), []).append(i)
    return MultiGraph(range(1, n + 1), pairs, next_id=n + 1)


# ----------------------------------------------------------- multicolored clique
@dataclass(frozen=True)
class MccInstance:
    """Multicolored Clique: ``k`` parts of ``n`` vertices ``(part, index)``, no edges inside a part."""

    k: int
    n: int
    edges: FrozenSet[Tuple[MccVertex, MccVertex]]

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < 1:
            raise ValueError("need k >= 1 parts of n >= 1 vertices")
        clean = set()
        for a, b in self.edges:
            for part, idx in (a, b):
                if not (0 <= part < self.k and 0 <= idx < self.n):
                    raise ValueError(f"vertex {(part, idx)} outside the partition")
            if a[0] == b[0]:
                raise ValueError(f"edge {a}-{b} lies inside part {a[0]}")
            clean.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(clean))

    def has_clique(self) -> bool:
        return has_multicolored_clique(self.edges, self.k, self.n)


def gen_mcc(k: int, n: int, density: float, seed: int) -> MccInstance:
    rng = random.Random(derive_seed(seed, "gen", "mcc"))
    edges = []
    for i, j in itertools.combinations(range(k), 2):
        for p in range(n):
            for q in range(n):
                if rng.random() < density:
                    edges.append(((i, p), (j, q)))
    return MccInstance(k, n, frozenset(edges))


def _pair_label(a: int, b: int, n: int) -> int:
    return a * (n + 1) + b


def gen_mcc_to_eulc(mcc: MccInstance) -> UlcInstance:
    """Edge ULC instance with budget ``k^2`` that is YES iff ``mcc`` has a multicolored clique.

    Labels ``(a, b)`` with ``0 <= a, b <= n`` are encoded as ``a * (n + 1) + b``.
    Vertex ``u^i_p`` gets id ``i*k*n + p + 1``.
    """
    k, n = mcc.k, mcc.n
    length = k * n
    sigma = (n + 1) ** 2

    def vid(i: int, p: int) -> int:
        return i * length + p + 1

    shift = PartialPermutation(
        (_pair_label(a, b, n), _pair_label((a - 1) % (n + 1), b, n)) for a in range(n + 1) for b in range(n + 1)
    )
    edges: List[Tuple[int, int, PartialPermutation]] = []
    for i in range(k):
        for p in range(length):
            edges.append((vid(i, p), vid(i, (p + 1) % length), shift))
    for i, j in itertools.combinations(range(k), 2):
        swap = _cross_constraint(mcc, i, j)
        edges.append((vid(i, j * n), vid(j, i * n), swap))
    lam = frozenset(_pair_label(a, b, n) for a in range(n) for b in range(n))
    domains = {v: lam for v in range(1, k * length + 1)}
    return _simple_ulc(k * length, sigma, domains, edges, k * k)


def _cross_constraint(mcc: MccInstance, i: int, j: int) -> PartialPermutation:
    n = mcc.n
    pairs = []
    for (a, b) in sorted(mcc.edges):
        if a[0] == i and b[0] == j:
            p, q = a[1], b[1]
            pairs.append((_pair_label(p, q, n), _pair_label(q, p, n)))
    return PartialPermutation(pairs)


def _simple_ulc(
    n: int,
    sigma: int,
    domains: Mapping[int, FrozenSet[int]],
    edges: Sequence[Tuple[int, int, PartialPermutation]],
    k: int,
) -> UlcInstance:
    """Edge ULC on ``1..n`` from constrained multi-edges and loops.

    ``(u, v, psi)`` maps labels of ``u`` to labels of ``v``.  Loops and every
    edge whose pair repeats are subdivided: identity on the ``u``-side halves,
    ``psi`` on the last one.  A loop becomes a triangle through two new vertices.
    """
    ident = PartialPermutation.identity(range(sigma))
    full = frozenset(range(sigma))
    count: Dict[Pair, int] = {}
    for u, v, _ in edges:
        if u != v:
            key = (min(u, v), max(u, v))
            count[key] = count.get(key, 0) + 1
    doms = dict(domains)
    nxt = n + 1
    plain: List[Tuple[int, int, PartialPermutation]] = []
    for u, v, psi in edges:
        if u != v and count[(min(u, v), max(u, v))] == 1:
            plain.append((u, v, psi))
            continue
        hops = 2 if u == v else 1
        path = [u] + list(range(nxt, nxt + hops)) + [v]
        for m in path[1:-1]:
            doms[m] = full
        nxt += hops
        for a, b in zip(path[:-2], path[1:-1]):
            plain.append((a, b, ident))
        plain.append((path[-2], v, psi))
    pairs_list: List[Pair] = []
    cons: Dict[Pair, PartialPermutation] = {}
    for u, v, psi in plain:
        key = (min(u, v), max(u, v))
        pairs_list.append(key)
        cons[key] = psi if u < v else psi.inverse()
    graph = build_graph(nxt - 1, pairs_list)
    domains_out = {v: doms.get(v, full) for v in graph.vertices}
    return UlcInstance(graph, sigma, domains_out, cons, k, edge=True)


# --------------------------------------------------------------- restriction
def _fixing_permutation(fixed: FrozenSet[int], size: int) -> PartialPermutation:
    """A permutation of ``0..size-1`` whose fixed points are exactly ``fixed``."""
    moved = [a for a in range(size) if a not in fixed]
    pairs = [(a, a) for a in sorted(fixed)]
    pairs += [(a, moved[(i + 1) % len(moved)]) for i, a in enumerate(moved)]
    return PartialPermutation(pairs)


def gen_restrict_ulc(inst: UlcInstance) -> UlcInstance:
    """Equivalent edge ULC with full lists and full permutations.

    Budget ``k(k+2)`` and alphabet ``s + k + 2``; list ``phi_v`` is encoded by
    ``k'+1`` loops carrying a permutation fixing exactly ``phi_v``, and each edge
    copy by ``k+2`` parallel permutations extending its constraint.
    """
    if not inst.edge:
        raise ValueError("the restriction applies to edge ULC")
    k, s = inst.k, inst.sigma
    k2 = k * (k + 2)
    s2 = s + k + 2
    gamma = list(range(s, s2))
    g = inst.graph
    order = {v: i + 1 for i, v in enumerate(g.vertices)}
    edges: List[Tuple[int, int, PartialPermutation]] = []
    for v in g.vertices:
        pi = _fixing_permutation(frozenset(inst.domain(v)), s2)
        edges.extend((order[v], order[v], pi) for _ in range(k2 + 1))
    index = g.edge_index()
    for e in g.edge_ids():
        u, v = index[e]
        psi = inst.psi(u, v)
        left = sorted(set(range(s)) - psi.domain) + gamma
        right = sorted(set(range(s)) - psi.image) + gamma
        for i in range(k + 2):
            ext = list(psi) + [(a, right[(j + i) % len(right)]) for j, a in enumerate(left)]
            edges.append((order[u], order[v], PartialPermutation(ext)))
    full = frozenset(range(s2))
    return _simple_ulc(len(order), s2, {order[v]: full for v in g.vertices}, edges, k2)


# ------------------------------------------------------------------ random
def _connected_edges(rng: random.Random, n: int, density: float) -> List[Pair]:
    """Random spanning tree on ``1..n`` plus every other pair with probability ``density``."""
    tree = {(rng.randint(1, v - 1), v) for v in range(2, n + 1)}
    edges = set(tree)
    for u, v in itertools.combinations(range(1, n + 1), 2):
        if (u, v) not in tree and rng.random() < density:
            edges.add((u, v))
    return sorted(edges)


def _random_partial_perm(rng: random.Random, sigma: int, forced: Optional[Tuple[int, int]], fill: float) -> PartialPermutation:
    src = list(range(sigma))
    dst = list(range(sigma))
    rng.shuffle(dst)
    pairs: Dict[int, int] = {}
    if forced is not None:
        a, b = forced
        pairs[a] = b
        src.remove(a)
        dst.remove(b)
    for a, b in zip(src, dst):
        if rng.random() < fill:
            pairs[a] = b
    return PartialPermutation(pairs.items())


def gen_random(
    problem: str,
    n: int,
    density: float,
    k: int,
    seed: int,
    *,
    s: int = 2,
    sigma: int = 2,
    classes: int = 2,
    terminals: Optional[int] = None,
    noise: float = 0.3,
):
    """Connected random instance on vertices ``1..n``, deterministic per seed.

    ``s`` is the Steiner target, ``sigma`` the ULC alphabet size, ``classes`` the
    MWCU class count and ``terminals`` the terminal count.  ULC constraints agree
    with a hidden labeling except on a ``noise`` fraction of edges.
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if n < 1 or k < 0 or not 0 <= density <= 1:
        raise ValueError("need n >= 1, k >= 0 and density in [0, 1]")
    rng = random.Random(derive_seed(seed, "gen", problem, n, k))
    edges = _connected_edges(rng, n, density)
    graph = build_graph(n, edges)
    verts = list(range(1, n + 1))
    if problem == "steiner":
        if s < 1 or s > n:
            raise ValueError("need 1 <= s <= n")
        count = terminals if terminals is not None else min(n, max(s, n // 3))
        if not s <= count <= n:
            raise ValueError("terminal count must lie between s and n")
        return SteinerInstance(graph, frozenset(rng.sample(verts, count)), s, k)
    if problem in ("emwcu", "nmwcu"):
        if classes < 1 or classes > n:
            raise ValueError("need 1 <= classes <= n")
        count = terminals if terminals is not None else min(n, classes + rng.randint(0, classes))
        if not classes <= count <= n:
            raise ValueError("terminal count must lie between classes and n")
        picked = rng.sample(verts, count)
        labels = list(range(classes)) + [rng.randrange(classes) for _ in range(count - classes)]
        cls = {t: c for t, c in zip(sorted(picked), labels)}
        edge = problem == "emwcu"
        return MwcuInstance(graph, cls, k, frozenset() if edge else frozenset(cls), edge=edge)
    if sigma < 1:
        raise ValueError("need sigma >= 1")
    hidden = {v: rng.randrange(sigma) for v in verts}
    domains = {}
    for v in verts:
        extra = {a for a in range(sigma) if rng.random() < 0.5}
        domains[v] = frozenset(extra | {hidden[v]})
    cons = {}
    for u, v in edges:
        forced = (hidden[u], hidden[v]) if rng.random() >= noise else None
        cons[(u, v)] = _random_partial_perm(rng, sigma, forced, 0.6)
    return UlcInstance(graph, sigma, domains, cons, k, edge=problem == "eulc")


def gen_planted_steiner(n: int, k: int, seed: int, out_degree: int = 3) -> SteinerInstance:
    """Sparse Steiner instance (about ``out_degree * n`` edges) with a planted cut of ``k`` edges.

    Vertex ``n`` is a terminal attached to ``k`` core vertices; a second terminal
    sits in the core, so ``s = 2`` is reachable within budget ``k``.
    """
    if n < k + 2 or k < 1:
        raise ValueError("need k >= 1 and n >= k + 2")
    rng = random.Random(derive_seed(seed, "gen", "planted-steiner", n, k))
    core = n - 1
    edges = {(v - 1, v) for v in range(2, core + 1)}
    for v in range(1, core + 1):
        for _ in range(out_degree - 1):
            w = rng.randint(1, core)
            if w != v:
                edges.add((min(v, w), max(v, w)))
    for w in rng.sample(range(1, core + 1), k):
        edges.add((w, n))
    graph = build_graph(n, sorted(edges))
    return SteinerInstance(graph, frozenset({n, rng.randint(1, core)}), 2, k)


def gen_planted_ulc(n: int, sigma: int, k: int, seed: int, density: float = 0.55, spoiled: int = 1) -> UlcInstance:
    """Dense node ULC instance with full permutations agreeing with a hidden labeling
    on every edge away from ``spoiled`` random vertices, so deleting those suffices."""
    rng = random.Random(derive_seed(seed, "gen", "planted-ulc", n, sigma, k))
    edges = _connected_edges(rng, n, density)
    hidden = {v: rng.randrange(sigma) for v in range(1, n + 1)}
    bad = set(rng.sample(range(1, n + 1), min(spoiled, n)))
    cons = {}
    for u, v in edges:
        perm = list(range(sigma))
        rng.shuffle(perm)
        if u not in bad and v not in bad:
            j = perm.index(hidden[v])
            perm[j], perm[hidden[u]] = perm[hidden[u]], perm[j]
        cons[(u, v)] = PartialPermutation(enumerate(perm))
    full = frozenset(range(sigma))
    return UlcInstance(build_graph(n, edges), sigma, {v: full for v in range(1, n + 1)}, cons, k)
