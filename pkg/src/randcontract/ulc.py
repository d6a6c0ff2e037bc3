"""Exact Node Unique Label Cover with vertex lists and partial permutations, plus the edge front-end.

A solution deletes at most ``k`` vertices and labels every survivor from its
list so that each surviving edge constraint holds.  The border version solves
every behavior: a map from border terminals to a label or ``DEAD``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .config import NO, UNKNOWN, YES, SolutionReport, SolverConfig, Stats, provenance, ulc_q, ulc_t
from .families import solver_family
from .flows import vertex_disjoint_paths
from .graph import GraphInputError, MultiGraph
from .instances import PartialPermutation, UlcInstance, ulc_valid
from .oracles import oracle_ulc_edge, oracle_ulc_node
from .parallel import ordered_map
from .seeds import derive_seed
from .separations import find_flower_separation, find_good_node_separation

DEAD = -1
BRUTE_FALLBACK_LIMIT = 200_000

Labeling = Dict[int, int]
Solution = Tuple[FrozenSet[int], Labeling]


# ------------------------------------------------------------------ working instance
@dataclass
class UlcGraph:
    """Mutable-by-copy view used by the solver.

    ``adj[u][v]`` maps a label of ``u`` to the label ``v`` must take; the map
    stored at ``adj[v][u]`` is always its inverse.
    """

    sigma: int
    phi: Dict[int, FrozenSet[int]]
    adj: Dict[int, Dict[int, Dict[int, int]]]

    @classmethod
    def from_instance(cls, inst: UlcInstance) -> "UlcGraph":
        g = inst.graph
        phi = {v: frozenset(inst.domain(v)) for v in g.vertices}
        adj: Dict[int, Dict[int, Dict[int, int]]] = {v: {} for v in g.vertices}
        for (u, v) in g.pairs:
            fwd = dict(inst.psi(u, v))
            adj[u][v] = fwd
            adj[v][u] = {b: a for a, b in fwd.items()}
        return cls(inst.sigma, phi, adj)

    def to_instance(self, k: int) -> UlcInstance:
        pairs = sorted((u, v) for u in self.adj for v in self.adj[u] if u < v)
        g = MultiGraph.from_edges(sorted(self.adj), pairs)
        cons = {(u, v): PartialPermutation(self.adj[u][v].items()) for u, v in pairs}
        return UlcInstance(g, self.sigma, dict(self.phi), cons, k)

    @property
    def vertices(self) -> List[int]:
        return sorted(self.adj)

    def copy(self) -> "UlcGraph":
        return UlcGraph(self.sigma, dict(self.phi), {u: {v: dict(m) for v, m in nb.items()} for u, nb in self.adj.items()})

    def induced(self, keep: Iterable[int]) -> "UlcGraph":
        keep = set(keep)
        return UlcGraph(
            self.sigma,
            {v: self.phi[v] for v in keep},
            {u: {v: dict(m) for v, m in self.adj[u].items() if v in keep} for u in keep},
        )

    def multigraph(self) -> MultiGraph:
        pairs = [(u, v) for u in sorted(self.adj) for v in sorted(self.adj[u]) if u < v]
        return MultiGraph.from_edges(sorted(self.adj), pairs)

    def closed_nbhd(self, vs: Iterable[int], removed: Set[int] = frozenset()) -> Set[int]:
        out = set(vs) - removed
        for v in list(out):
            out.update(w for w in self.adj[v] if w not in removed)
        return out

    def components(self, vs: Iterable[int]) -> List[List[int]]:
        left = set(vs)
        out: List[List[int]] = []
        for start in sorted(left):
            if start not in left:
                continue
            left.discard(start)
            comp, stack = [start], [start]
            while stack:
                x = stack.pop()
                for y in self.adj[x]:
                    if y in left:
                        left.discard(y)
                        comp.append(y)
                        stack.append(y)
            out.append(sorted(comp))
        return out


# ------------------------------------------------------------------ labelings
def _propagate(w: UlcGraph, area: Set[int], v: int, alpha: int) -> Optional[Labeling]:
    if alpha not in w.phi[v]:
        return None
    lab = {v: alpha}
    stack = [v]
    while stack:
        x = stack.pop()
        a = lab[x]
        for y, m in w.adj[x].items():
            if y not in area:
                continue
            b = m.get(a)
            if b is None or b not in w.phi[y]:
                return None
            seen = lab.get(y)
            if seen is None:
                lab[y] = b
                stack.append(y)
            elif seen != b:
                return None
    if len(lab) != len(area):
        raise GraphInputError("propagation needs a connected vertex set")
    return lab


def _labelings(w: UlcGraph, area: Iterable[int]) -> List[Labeling]:
    area = set(area)
    v = min(area)
    out = []
    for alpha in sorted(w.phi[v]):
        lab = _propagate(w, area, v, alpha)
        if lab is not None:
            out.append(lab)
    return out


def _extend(w: UlcGraph, area: Iterable[int], fixed: Mapping[int, int]) -> Optional[Labeling]:
    """A labeling of ``G[area]`` agreeing with ``fixed`` on ``area``, or ``None``."""
    out: Labeling = {}
    for comp in w.components(area):
        anchor = next((v for v in comp if v in fixed), None)
        if anchor is None:
            options = _labelings(w, comp)
            if not options:
                return None
            out.update(options[0])
            continue
        lab = _propagate(w, set(comp), anchor, fixed[anchor])
        if lab is None or any(lab[v] != fixed[v] for v in comp if v in fixed):
            return None
        out.update(lab)
    return out


def _is_labeling(w: UlcGraph, lab: Mapping[int, int]) -> bool:
    for v, a in lab.items():
        if a not in w.phi[v]:
            return False
        for y, m in w.adj[v].items():
            if y in lab and m.get(a) != lab[y]:
                return False
    return True


def propagate_labeling(inst: UlcInstance, area: Iterable[int], v: int, alpha: int) -> Optional[Labeling]:
    """The unique labeling of the connected set ``area`` with ``v`` labeled ``alpha``, or ``None``."""
    area = set(area)
    if v not in area:
        raise GraphInputError(f"anchor {v} lies outside the vertex set")
    return _propagate(UlcGraph.from_instance(inst), area, v, alpha)


def enumerate_labelings(inst: UlcInstance, area: Iterable[int]) -> List[Labeling]:
    """All (at most ``sigma``) labelings of a connected vertex set."""
    return _labelings(UlcGraph.from_instance(inst), area)


# ------------------------------------------------------------------ graph operations
def _update(w: UlcGraph, u: int, v: int, psi: Mapping[int, int]) -> None:
    if v in w.adj[u]:
        cur = w.adj[u][v]
        new = {a: b for a, b in cur.items() if psi.get(a) == b}
    else:
        new = dict(psi)
    w.adj[u][v] = new
    w.adj[v][u] = {b: a for a, b in new.items()}


@dataclass(frozen=True)
class BypassRecord:
    """What is needed to relabel a bypassed vertex from any surviving neighbour."""

    vertex: int
    phi: FrozenSet[int]
    towards: Mapping[int, Mapping[int, int]]


def _bypass(w: UlcGraph, v: int) -> BypassRecord:
    """Bypass ``v`` in place; the caller guarantees a non-empty list at ``v``."""
    phi_v = w.phi[v]
    nbrs = sorted(w.adj[v])
    record = BypassRecord(v, phi_v, {u: dict(w.adj[u][v]) for u in nbrs})
    for u in nbrs:
        into = w.adj[u][v]
        w.phi[u] = frozenset(b for b in w.phi[u] if into.get(b) in phi_v)
    for u1, u2 in itertools.combinations(nbrs, 2):
        first, second = w.adj[u1][v], w.adj[v][u2]
        composed = {a: second[b] for a, b in first.items() if b in second}
        _update(w, u1, u2, composed)
    for u in nbrs:
        del w.adj[u][v]
    del w.adj[v]
    del w.phi[v]
    return record


def _unbypass(records: Sequence[BypassRecord], cut: Set[int], lab: Labeling) -> Labeling:
    lab = dict(lab)
    for rec in reversed(records):
        alpha = None
        for u in sorted(rec.towards):
            if u not in cut:
                alpha = rec.towards[u][lab[u]]
                break
        if alpha is None:
            alpha = min(rec.phi)
        lab[rec.vertex] = alpha
    return lab


def update_edge(inst: UlcInstance, u: int, v: int, psi: PartialPermutation) -> UlcInstance:
    """Add edge ``uv`` with constraint ``psi`` (seen from ``u``), or intersect the existing one."""
    if u == v:
        raise GraphInputError("update_edge needs two distinct vertices")
    w = UlcGraph.from_instance(inst)
    _update(w, u, v, dict(psi))
    return _rebuild(w, inst)


def bypass_vertex_ulc(inst: UlcInstance, v: int) -> UlcInstance:
    """Remove ``v``, restrict neighbour lists through it and join its neighbours by composed constraints."""
    w = UlcGraph.from_instance(inst)
    if not w.phi[v]:
        raise ValueError(f"vertex {v} has an empty list and cannot be bypassed")
    _bypass(w, v)
    return _rebuild(w, inst)


def _rebuild(w: UlcGraph, inst: UlcInstance) -> UlcInstance:
    out = w.to_instance(inst.k)
    return UlcInstance(out.graph, out.sigma, out.domains, out.constraints, inst.k, inst.edge)


# ------------------------------------------------------------------ behaviors
@dataclass(frozen=True)
class UlcBehavior:
    """Label (or ``DEAD``) demanded for each border terminal, as sorted pairs."""

    assignment: Tuple[Tuple[int, int], ...]

    @property
    def dead(self) -> FrozenSet[int]:
        return frozenset(v for v, a in self.assignment if a == DEAD)

    @property
    def labels(self) -> Dict[int, int]:
        return {v: a for v, a in self.assignment if a != DEAD}


def ulc_behaviors(border: Iterable[int], sigma: int) -> List[UlcBehavior]:
    border = sorted(border)
    return [UlcBehavior(tuple(zip(border, combo))) for combo in itertools.product([DEAD] + list(range(sigma)), repeat=len(border))]


def consistent(w: UlcGraph, k: int, border: Iterable[int], beh: UlcBehavior, cut: Iterable[int], lab: Mapping[int, int]) -> bool:
    """Whether ``(cut, lab)`` solves the instance and matches ``beh`` on the border."""
    x = set(cut)
    if len(x) > k or not x <= set(w.adj):
        return False
    if x & set(border) != beh.dead:
        return False
    alive = [v for v in w.adj if v not in x]
    if set(lab) != set(alive) or not _is_labeling(w, lab):
        return False
    return all(lab[v] == a for v, a in beh.labels.items())


# ------------------------------------------------------------------ solver
@dataclass
class _Context:
    cfg: SolverConfig
    q: int
    t: int
    stats: Stats = field(default_factory=Stats)

    def seed(self, site: str) -> int:
        return derive_seed(self.cfg.seed, "ulc", site)


BorderResult = Dict[UlcBehavior, Solution]


def solve_border_ulc(
    w: UlcGraph,
    k: int,
    border: Iterable[int] = (),
    cfg: SolverConfig = SolverConfig(),
    stats: Optional[Stats] = None,
) -> BorderResult:
    """Minimum solution for every behavior of a connected border instance.

    Behaviors missing from the result have no solution.
    """
    q = cfg.q_override or ulc_q(k, w.sigma)
    t = cfg.t_override or ulc_t(q, k)
    ctx = _Context(cfg, q, t)
    if t < ulc_t(q, k):
        ctx.stats.exact = False
    out = _solve(w, k, frozenset(border), ctx, 0, "root")
    if stats is not None:
        stats.merge(ctx.stats)
    return out


def _check(w: UlcGraph, k: int, border: FrozenSet[int], res: BorderResult) -> BorderResult:
    for beh, (cut, lab) in res.items():
        if not consistent(w, k, border, beh, cut, lab):
            raise AssertionError(f"solution {sorted(cut)} does not realize {beh}")
    return res


def _solve(w: UlcGraph, k: int, border: FrozenSet[int], ctx: _Context, depth: int, site: str) -> BorderResult:
    if len(border) > 4 * k and border:
        raise ValueError(f"{len(border)} border terminals exceed 4k = {4 * k}")
    if len(w.components(w.adj)) > 1:
        raise GraphInputError("border instances must be connected")
    ctx.stats.high("max_depth", depth)
    ctx.stats.bump("border_calls")
    n = len(w.adj)
    stalled = False
    if k > 0:
        for n_opt, (vstar, _) in enumerate(_separations(w, k, border, ctx, site)):
            ctx.stats.bump("separations")
            res = _recurse(w, k, border, vstar, ctx, depth, f"{site}/s{n_opt}")
            if res is not None:
                return _check(w, k, border, res)
            ctx.stats.bump("stalled_separations")
            stalled = True
    if stalled and n > ctx.q * ctx.t + k:
        if _subsets_upto(n, k) <= BRUTE_FALLBACK_LIMIT:
            ctx.stats.bump("brute_force")
            return _check(w, k, border, _brute_force(w, k, border))
        ctx.stats.exact = False
    if n <= ctx.q * ctx.t + k:
        ctx.stats.bump("brute_force")
        return _check(w, k, border, _brute_force(w, k, border))
    return _check(w, k, border, _high_connectivity(w, k, border, ctx, site))


def _subsets_upto(n: int, k: int) -> int:
    return sum(math.comb(n, i) for i in range(min(n, k) + 1))


def _separations(w: UlcGraph, k: int, border: FrozenSet[int], ctx: _Context, site: str):
    g = w.multigraph()
    mode, delta = ctx.cfg.family_mode, ctx.cfg.delta
    sep = find_good_node_separation(g, (), ctx.q, 2 * k, mode, ctx.seed(site + "/node"), delta)
    if sep is not None:
        sides = sorted((sep.side1, sep.side2), key=lambda s: (len(s), min(s)))
        return [(frozenset(s), sep.separator) for s in sides if len(s & border) <= 2 * k]
    flower = find_flower_separation(g, (), border, ctx.q, k, mode, ctx.seed(site + "/flower"), delta)
    if flower is not None:
        return [(flower.petal_union(), flower.core)]
    return []


def _recurse(w: UlcGraph, k: int, border: FrozenSet[int], vstar: FrozenSet[int], ctx: _Context, depth: int, site: str):
    zw = w.closed_nbhd(vstar) - vstar
    region = set(vstar) | zw
    sub_border = frozenset((border | zw) & region)
    sub = w.induced(region)
    assert len(sub.adj) < len(w.adj), "recursion must shrink the graph"
    sub_res = _solve(sub, k, sub_border, ctx, depth + 1, site)
    if not sub_res:
        return {}
    used = set(sub_border)
    for cut, _ in sub_res.values():
        used |= cut
    doomed = sorted(set(vstar) - used)
    if not doomed:
        return None
    w2 = w.copy()
    records = []
    for v in doomed:
        if not w2.phi[v]:
            ctx.stats.bump("bypass_refutations")
            return {}
        records.append(_bypass(w2, v))
    ctx.stats.bump("bypassed", len(doomed))
    res2 = _solve(w2, k, border, ctx, depth + 1, site + "/r")
    out: BorderResult = {}
    for beh, (cut, lab) in res2.items():
        out[beh] = (cut, _unbypass(records, set(cut), lab))
    return out


# ------------------------------------------------------------------ brute force
def _realized(w: UlcGraph, border: FrozenSet[int], cut: FrozenSet[int]):
    """Behaviors reachable with deletion set ``cut``, each with one witness labeling."""
    alive = [v for v in w.adj if v not in cut]
    fixed: Labeling = {}
    choices: List[List[Labeling]] = []
    for comp in w.components(alive):
        options = _labelings(w, comp)
        if not options:
            return
        touched = [v for v in comp if v in border]
        if not touched:
            fixed.update(options[0])
            continue
        distinct: Dict[Tuple[int, ...], Labeling] = {}
        for lab in options:
            distinct.setdefault(tuple(lab[v] for v in touched), lab)
        choices.append(list(distinct.values()))
    for combo in itertools.product(*choices):
        lab = dict(fixed)
        for part in combo:
            lab.update(part)
        beh = UlcBehavior(tuple((v, DEAD if v in cut else lab[v]) for v in sorted(border)))
        yield beh, lab


def _brute_force(w: UlcGraph, k: int, border: FrozenSet[int]) -> BorderResult:
    out: BorderResult = {}
    verts = w.vertices
    for size in range(min(k, len(verts)) + 1):
        for x in itertools.combinations(verts, size):
            cut = frozenset(x)
            for beh, lab in _realized(w, border, cut):
                if beh not in out:
                    out[beh] = (cut, lab)
    return out


# ------------------------------------------------------------------ high connectivity
@dataclass
class _Tree:
    """Search-tree bookkeeping for one ``(behavior, S, big labeling)`` branch."""

    leaves: int = 0
    best: Optional[Solution] = None


@dataclass(frozen=True)
class SearchState:
    """Committed deletions, committed survivors, and the labeled survivors with their labels."""

    x0: FrozenSet[int]
    y: FrozenSet[int]
    labeled: FrozenSet[int]
    lab: Mapping[int, int]


@dataclass(frozen=True)
class StainDecomposition:
    stains: Tuple[Tuple[int, ...], ...]
    big: FrozenSet[int]
    big_nbhd: FrozenSet[int]
    psi: Tuple[Mapping[int, int], ...]


def clean_s(w: UlcGraph, s: Iterable[int], forsaken: Set[int]) -> FrozenSet[int]:
    """Add every non-forsaken vertex whose closed neighbourhood misses ``S`` (ascending order)."""
    out = set(s)
    for v in w.vertices:
        if v in forsaken or v in out:
            continue
        if not (set(w.adj[v]) & out):
            out.add(v)
    return frozenset(out)


def stain_paths(w: UlcGraph, c1: Sequence[int], c2: Sequence[int], limit: int) -> List[List[int]]:
    """Up to ``limit`` paths from ``c1`` to ``c2`` with pairwise disjoint interiors."""
    a, b = set(c1), set(c2)
    outside = set(w.adj) - a - b
    g = w.multigraph()
    near1 = {v for v in outside if set(w.adj[v]) & a}
    near2 = {v for v in outside if set(w.adj[v]) & b}
    inner = vertex_disjoint_paths(g, near1, near2, limit, allowed=outside)
    out = []
    for path in inner:
        head = min(set(w.adj[path[0]]) & a)
        tail = min(set(w.adj[path[-1]]) & b)
        out.append([head] + path + [tail])
    return out


def big_labelings(w: UlcGraph, k: int, q: int, s: FrozenSet[int], stats: Optional[Stats] = None) -> StainDecomposition:
    """Stains of ``G[S]`` and the at most ``sigma`` candidate labelings of the big ones."""
    stains = w.components(s)
    big_stains = [c for c in stains if len(c) > q]
    big = frozenset(v for c in big_stains for v in c)
    nbhd = frozenset(w.closed_nbhd(big))
    if not big_stains:
        return StainDecomposition(tuple(map(tuple, stains)), big, nbhd, ())
    first = max(big_stains, key=lambda c: (len(c), -c[0]))
    others = [c for c in big_stains if c is not first]
    routes = {}
    for c2 in others:
        routes[c2[0]] = stain_paths(w, first, c2, 2 * k + 1)
        if len(routes[c2[0]]) < 2 * k + 1 and stats is not None:
            stats.exact = False
            stats.bump("short_path_systems")
    out: List[Labeling] = []
    for base in _labelings(w, first):
        combined = dict(base)
        ok = True
        for c2 in others:
            votes: Dict[Tuple[int, ...], int] = {}
            found: Dict[Tuple[int, ...], Labeling] = {}
            for path in routes[c2[0]]:
                cur: Optional[int] = base[path[0]]
                for prev, nxt in zip(path, path[1:]):
                    cur = w.adj[prev][nxt].get(cur)
                    if cur is None or cur not in w.phi[nxt]:
                        cur = None
                        break
                if cur is None:
                    continue
                lab = _propagate(w, set(c2), path[-1], cur)
                if lab is None:
                    continue
                key = tuple(lab[v] for v in c2)
                votes[key] = votes.get(key, 0) + 1
                found[key] = lab
            winner = next((key for key, n in votes.items() if n >= k + 1), None)
            if winner is None:
                ok = False
                break
            combined.update(found[winner])
        if ok:
            out.append(combined)
    assert len(out) <= w.sigma
    return StainDecomposition(tuple(map(tuple, stains)), big, nbhd, tuple(out))


def blocking_set(w: UlcGraph, area: Set[int], lab: Mapping[int, int], x0: Set[int]) -> Tuple[int, ...]:
    """At most two outside neighbours of ``area`` that cannot be labeled together with it."""
    ring = sorted(w.closed_nbhd(area, x0) - area)
    guess: Labeling = {}
    for v in ring:
        anchor = min(u for u in w.adj[v] if u in area)
        alpha = w.adj[anchor][v].get(lab[anchor])
        if alpha is None or alpha not in w.phi[v]:
            return (v,)
        guess[v] = alpha
    ring_set = set(ring)
    for v in ring:
        for u, m in sorted(w.adj[v].items()):
            if u in area:
                if m.get(guess[v]) != lab[u]:
                    return (v,)
            elif u in ring_set and u > v and m.get(guess[v]) != guess[u]:
                return (v, u)
    raise AssertionError("neighbourhood labeling exists; no blocking set")


def _high_connectivity(w: UlcGraph, k: int, border: FrozenSet[int], ctx: _Context, site: str) -> BorderResult:
    ctx.stats.bump("high_connectivity")
    out: BorderResult = {}
    for beh, lab in _realized(w, border, frozenset()):
        out.setdefault(beh, (frozenset(), lab))
    if k == 0:
        return out
    family = solver_family(w.vertices, ctx.q * ctx.t + (ctx.q + 1) * k, k, ctx.cfg.family_mode, ctx.seed(site), "ulc-interrogate", ctx.cfg.delta)
    members = list(family)
    empty_phi = {v for v in w.adj if not w.phi[v]}
    todo = [
        b
        for b in ulc_behaviors(border, w.sigma)
        if b not in out and all(a in w.phi[v] for v, a in b.labels.items()) and len(b.dead | empty_phi) <= k
    ]
    decomp_cache: Dict[FrozenSet[int], StainDecomposition] = {}
    limit = (2 * w.sigma + 1) ** k

    def run(beh: UlcBehavior) -> Optional[Solution]:
        forsaken = set(beh.dead) | empty_phi
        best: Optional[Solution] = None
        for member in members:
            if member & forsaken:
                continue
            s = clean_s(w, member, forsaken)
            dec = decomp_cache.get(s)
            if dec is None:
                dec = big_labelings(w, k, ctx.q, s, ctx.stats)
                decomp_cache[s] = dec
            if not dec.big:
                continue
            for psi_big in dec.psi:
                tree = _Tree()
                _search_root(w, k, border, beh, s, dec, psi_big, forsaken, tree)
                ctx.stats.bump("search_leaves", tree.leaves)
                ctx.stats.high("max_search_leaves", tree.leaves)
                if tree.leaves > limit:
                    raise AssertionError(f"search tree has {tree.leaves} leaves, above {limit}")
                if tree.best is not None and _better(tree.best[0], best):
                    best = tree.best
        return best

    ctx.stats.bump("hc_sets", len(members))
    # Stain decompositions are shared through the cache, so branches run sequentially here.
    for beh, sol in zip(todo, ordered_map(run, todo, 1)):
        if sol is not None:
            out[beh] = sol
    return out


def _better(cut: FrozenSet[int], best: Optional[Solution]) -> bool:
    return best is None or (len(cut), sorted(cut)) < (len(best[0]), sorted(best[0]))


def _search_root(w, k, border, beh: UlcBehavior, s, dec: StainDecomposition, psi_big, forsaken, tree: _Tree) -> None:
    x0 = set(forsaken)
    y = set(s)
    labeled = set(dec.big)
    lab = dict(psi_big)
    for v, a in beh.assignment:
        if a == DEAD:
            if v in y:
                tree.leaves += 1
                return
            continue
        if v in labeled:
            if lab[v] != a:
                tree.leaves += 1
                return
            continue
        if v in x0:
            tree.leaves += 1
            return
        y.add(v)
        comp = next(c for c in w.components(y) if v in c)
        got = _propagate(w, set(comp), v, a)
        if got is None or any(got[u] != lab[u] for u in comp if u in labeled):
            tree.leaves += 1
            return
        labeled.update(comp)
        lab.update(got)
    _search(w, k, dec, frozenset(s), SearchState(frozenset(x0), frozenset(y), frozenset(labeled), lab), tree)


def _search(w: UlcGraph, k: int, dec: StainDecomposition, s: FrozenSet[int], st: SearchState, tree: _Tree) -> None:
    x0, y, labeled, lab = set(st.x0), set(st.y), set(st.labeled), dict(st.lab)
    everything = set(w.adj)
    while True:
        if len(x0) > k:
            tree.leaves += 1
            return
        full = _extend(w, everything - x0, lab)
        if full is not None:
            tree.leaves += 1
            if _better(frozenset(x0), tree.best):
                tree.best = (frozenset(x0), full)
            return
        children: List[SearchState] = []
        ring = w.closed_nbhd(labeled, x0)
        if _extend(w, ring, lab) is None:
            for b in blocking_set(w, labeled, lab, x0):
                children.append(SearchState(frozenset(x0 | {b}), frozenset(y), frozenset(labeled), lab))
        else:
            blocked = dec.big_nbhd | x0
            comp = next(
                (c for c in w.components(everything - blocked) if any(v in y and v not in labeled for v in c)),
                None,
            )
            assert comp is not None, "no rule applies to a live search state"
            cset = set(comp)
            cstar = set(dec.big) | (w.closed_nbhd(cset) - x0)
            ext = _extend(w, cstar, {v: lab[v] for v in cstar if v in labeled})
            if ext is not None:
                fresh = {v for v in cset if v in y and v not in labeled}
                labeled |= fresh
                lab.update({v: ext[v] for v in fresh})
                continue
            outside = w.closed_nbhd(cset) - cset
            small = _small_branch(w, cset, s, x0, y, labeled, lab)
            if outside <= x0:
                if small is None:
                    tree.leaves += 1
                    return
                x0, y, labeled, lab = set(small.x0), set(small.y), set(small.labeled), dict(small.lab)
                continue
            if small is not None:
                children.append(small)
            for psi_c in _labelings(w, cset):
                if any(psi_c[v] != lab[v] for v in cset if v in labeled):
                    continue
                lab2 = dict(lab)
                lab2.update(psi_c)
                labeled2 = labeled | cset
                if not _is_labeling(w, {v: lab2[v] for v in labeled2}):
                    continue
                assert _extend(w, w.closed_nbhd(labeled2, x0), lab2) is None, "neighbourhood rule must apply next"
                for b in blocking_set(w, labeled2, lab2, x0):
                    children.append(SearchState(frozenset(x0 | {b}), frozenset(y | cset), frozenset(labeled2), lab2))
        children = [c for c in children if len(c.x0) <= k]
        if not children:
            tree.leaves += 1
            return
        for child in children:
            _search(w, k, dec, s, child, tree)
        return


def _small_branch(w: UlcGraph, cset: Set[int], s: FrozenSet[int], x0, y, labeled, lab) -> Optional[SearchState]:
    """The branch where ``C`` avoids the big component: only small stains survive, fully cut off."""
    drop = cset - s
    if drop & y:
        return None
    x0 = set(x0) | drop
    labeled = set(labeled)
    lab = dict(lab)
    for stain in w.components(cset & s):
        around = w.closed_nbhd(stain) - set(stain)
        if around & y:
            return None
        x0 |= around
        if stain[0] in labeled:
            continue
        options = _labelings(w, stain)
        if not options:
            return None
        labeled.update(stain)
        lab.update(options[0])
    if not _is_labeling(w, {v: lab[v] for v in labeled}):
        return None
    return SearchState(frozenset(x0), frozenset(y), frozenset(labeled), lab)


# ------------------------------------------------------------------ front-ends
@dataclass(frozen=True)
class EdgeReduction:
    """Node instance built from an edge instance plus the maps needed to translate back."""

    node: UlcInstance
    middle: Mapping[int, int]
    copies: Mapping[int, Tuple[int, ...]]


def reduce_edge_ulc(inst: UlcInstance) -> EdgeReduction:
    """Subdivide each edge (identity on the first half) and blow every vertex up into a ``(k+1)``-clique."""
    g, k, sigma = inst.graph, inst.k, inst.sigma
    nxt = g.next_id
    copies: Dict[int, Tuple[int, ...]] = {}
    for v in g.vertices:
        copies[v] = (v,) + tuple(range(nxt, nxt + k))
        nxt += k
    middle: Dict[int, int] = {}
    index = g.edge_index()
    domains: Dict[int, FrozenSet[int]] = {}
    cons: Dict[Tuple[int, int], PartialPermutation] = {}
    ident = PartialPermutation.identity(range(sigma))
    for v, group in copies.items():
        for c in group:
            domains[c] = frozenset(inst.domain(v))
        for a, b in itertools.combinations(group, 2):
            cons[(min(a, b), max(a, b))] = ident
    for e in g.edge_ids():
        u, v = index[e]
        m = nxt
        nxt += 1
        middle[m] = e
        domains[m] = frozenset(range(sigma))
        psi = inst.psi(u, v)
        for c in copies[u]:
            cons[(min(c, m), max(c, m))] = ident
        for c in copies[v]:
            # the constraint from m towards c is psi (m carries the label of u)
            cons[(min(c, m), max(c, m))] = psi if m < c else psi.inverse()
    verts = sorted(domains)
    h = MultiGraph.from_edges(verts, sorted(cons))
    node = UlcInstance(h, sigma, domains, cons, k, edge=False)
    return EdgeReduction(node, middle, copies)


def solve_ulc(inst: UlcInstance, cfg: SolverConfig = SolverConfig()) -> SolutionReport:
    """Minimum deletion set (vertices, or edge ids when ``inst.edge``) with a witness labeling."""
    if inst.k < 0 or inst.sigma < 1:
        raise GraphInputError("need k >= 0 and a non-empty alphabet")
    for (u, v), psi in inst.constraints.items():
        if u >= v or not inst.graph.multiplicity(u, v):
            raise GraphInputError(f"constraint on ({u}, {v}) does not match an edge")
        if any(not (0 <= a < inst.sigma and 0 <= b < inst.sigma) for a, b in psi):
            raise GraphInputError(f"constraint on ({u}, {v}) uses labels outside the alphabet")
    problem = "eulc" if inst.edge else "nulc"
    stats = Stats()
    q = cfg.q_override or ulc_q(inst.k, inst.sigma)
    prov = provenance(cfg, q=q, t=cfg.t_override or ulc_t(q, inst.k))
    if cfg.mode == "bruteforce":
        res = oracle_ulc_edge(inst) if inst.edge else oracle_ulc_node(inst)
        return _report(problem, YES if res.feasible else NO, list(res.solution), res.labeling, prov, stats)
    if inst.edge:
        red = reduce_edge_ulc(inst)
        answer, cut, lab = _solve_node(red.node, cfg, stats)
        if answer != YES:
            return _report(problem, answer, [], None, prov, stats)
        if any(v not in red.middle for v in cut):
            raise AssertionError("a minimum solution never deletes a vertex copy")
        solution = sorted(red.middle[v] for v in cut)
        labels = {v: lab[group[0]] for v, group in red.copies.items()}
    else:
        answer, cut, lab = _solve_node(inst, cfg, stats)
        if answer != YES:
            return _report(problem, answer, [], None, prov, stats)
        solution, labels = sorted(cut), lab
    if not ulc_valid(inst, solution, labels):
        raise AssertionError("solver produced an invalid solution")
    return _report(problem, YES, solution, labels, prov, stats)


def _solve_node(inst: UlcInstance, cfg: SolverConfig, stats: Stats):
    w = UlcGraph.from_instance(inst)
    cut: Set[int] = set()
    lab: Labeling = {}
    empty = UlcBehavior(())
    for n_part, comp in enumerate(w.components(w.adj)):
        part_cfg = SolverConfig(cfg.mode, cfg.family, cfg.delta, derive_seed(cfg.seed, "part", n_part), cfg.q_override, cfg.t_override, cfg.threads)
        res = solve_border_ulc(w.induced(comp), inst.k, (), part_cfg, stats)
        sol = res.get(empty)
        if sol is None:
            return (NO if cfg.deterministic and stats.exact else UNKNOWN), frozenset(), {}
        cut |= sol[0]
        lab.update(sol[1])
    if len(cut) > inst.k:
        return NO, frozenset(), {}
    return YES, frozenset(cut), lab


def _report(problem, answer, solution, labeling, prov, stats: Stats) -> SolutionReport:
    prov = dict(prov)
    prov["exact"] = stats.exact and prov.get("family") != "randomized"
    return SolutionReport(problem, answer, list(solution), dict(labeling) if labeling is not None else None, prov, stats.as_dict())
