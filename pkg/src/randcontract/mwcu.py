"""Exact Node Multiway Cut-Uncut with an undeletable vertex set, and its edge front-end.

A solution deletes at most ``k`` deletable vertices so that two terminals share
a component exactly when they share a class.  The border version solves every
behavior ``(X_b, E_b, R_b)`` on the border terminals: which of them are deleted,
which extra adjacencies the outside world provides, and the resulting
connectivity classes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .config import NO, UNKNOWN, YES, SolutionReport, SolverConfig, Stats, mwcu_q, mwcu_t, provenance
from .families import solver_family
from .flows import FlowNetwork
from .graph import GraphInputError, MultiGraph, connected_components, merge_partition
from .instances import MwcuInstance, mwcu_valid
from .oracles import oracle_mwcu_edge, oracle_mwcu_node
from .parallel import ordered_map
from .seeds import derive_seed
from .separations import find_flower_separation, find_good_node_separation
from .steiner import set_partitions

Relation = Tuple[Tuple[int, ...], ...]
VertexSet = FrozenSet[int]
BRUTE_FALLBACK_LIMIT = 200_000


def _relation(blocks: Iterable[Iterable[int]]) -> Relation:
    return tuple(sorted(tuple(sorted(b)) for b in blocks if b))


def class_partition(classes: Mapping[int, int]) -> Relation:
    groups: Dict[int, List[int]] = {}
    for t, c in classes.items():
        groups.setdefault(c, []).append(t)
    return _relation(groups.values())


# ------------------------------------------------------------------ behaviors
@dataclass(frozen=True)
class MwcuBehavior:
    """Deleted border terminals, extra adjacency among the rest, and the demanded classes.

    ``relation`` partitions the terminals together with the surviving border
    terminals; ``extra`` partitions the surviving border terminals and must
    refine ``relation``.
    """

    deleted: VertexSet
    extra: Relation
    relation: Relation

    def extra_pairs(self) -> List[Tuple[int, int]]:
        return [(block[0], v) for block in self.extra for v in block[1:]]


def mwcu_behaviors(terminal_classes: Relation, border: Iterable[int]) -> List[MwcuBehavior]:
    """Behaviors built constructively: every extra block joins a terminal class or a new class."""
    border = sorted(border)
    base = [list(c) for c in terminal_classes]
    out: List[MwcuBehavior] = []
    for size in range(len(border) + 1):
        for xb in itertools.combinations(border, size):
            rest = [v for v in border if v not in xb]
            for extra in set_partitions(rest):
                for target in _assignments(len(extra), len(base)):
                    groups = [list(c) for c in base]
                    fresh: Dict[int, List[int]] = {}
                    for block, c in zip(extra, target):
                        if c < len(base):
                            groups[c].extend(block)
                        else:
                            fresh.setdefault(c, []).extend(block)
                    rel = _relation(groups + list(fresh.values()))
                    out.append(MwcuBehavior(frozenset(xb), extra, rel))
    return out


def _assignments(blocks: int, existing: int) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = []

    def grow(prefix: List[int], fresh: int) -> None:
        if len(prefix) == blocks:
            out.append(tuple(prefix))
            return
        for c in range(existing + fresh + 1):
            prefix.append(c)
            grow(prefix, fresh + (c == existing + fresh))
            prefix.pop()

    grow([], 0)
    return out


def realized_relation(
    g: MultiGraph, terminals: Iterable[int], border: Iterable[int], cut: Iterable[int], extra_pairs: Iterable[Tuple[int, int]] = ()
) -> Relation:
    """Classes of terminals and surviving border terminals in ``G - cut`` plus extra edges."""
    x = set(cut)
    comps = connected_components(g, removed_vertices=x, extra_pairs=[p for p in extra_pairs if p[0] not in x and p[1] not in x])
    comp: Dict[int, int] = {v: i for i, c in enumerate(comps) for v in c}
    groups: Dict[int, List[int]] = {}
    for v in sorted(set(terminals) | (set(border) - x)):
        groups.setdefault(comp[v], []).append(v)
    return _relation(groups.values())


def satisfies_mwcu(
    g: MultiGraph,
    terminals: Iterable[int],
    undeletable: Iterable[int],
    border: Iterable[int],
    k: int,
    beh: MwcuBehavior,
    cut: Iterable[int],
) -> bool:
    x = set(cut)
    terminals = set(terminals)
    if len(x) > k or x & (terminals | set(undeletable)) or not x <= set(g.vertices):
        return False
    if x & set(border) != beh.deleted:
        return False
    return realized_relation(g, terminals, border, x, beh.extra_pairs()) == beh.relation


def _better(cand: VertexSet, best: Optional[VertexSet]) -> bool:
    return best is None or (len(cand), sorted(cand)) < (len(best), sorted(best))


# ---------------------------------------------------------- class reduction
def forced_vertex(g: MultiGraph, classes: Mapping[int, int], undeletable: Iterable[int], k: int, v: int) -> bool:
    """Whether ``v`` reaches ``k + 2`` distinct classes through paths sharing only undeletable vertices."""
    blocked = set(classes) | set(undeletable)
    big = k + 2
    net = FlowNetwork()
    source, sink = ("src",), ("sink",)
    for x in g.vertices:
        if x == v:
            continue
        net.add_arc((x, 0), (x, 1), big if x in blocked else 1)
    for (a, b) in g.pairs:
        for x, y in ((a, b), (b, a)):
            tail = source if x == v else (x, 1)
            if y == v:
                continue
            net.add_arc(tail, (y, 0), big)
    for t, c in classes.items():
        if t != v:
            net.add_arc((t, 1), ("class", c), 1)
    for c in set(classes.values()):
        net.add_arc(("class", c), sink, 1)
    net.add_node(source)
    net.add_node(sink)
    return net.max_flow(source, sink, limit=big) >= big


@dataclass(frozen=True)
class ReducedMwcu:
    """Outcome of class reduction: per-component subinstances plus forced deletions."""

    forced: VertexSet
    parts: Tuple[MwcuInstance, ...]
    feasible: bool


def reduce_equivalence_classes(inst: MwcuInstance) -> ReducedMwcu:
    g, k = inst.graph, inst.k
    classes = dict(inst.classes)
    blocked = set(classes) | set(inst.undeletable)
    forced: List[int] = []
    changed = True
    while changed:
        changed = False
        for v in g.vertices:
            if v in blocked:
                continue
            if forced_vertex(g, classes, blocked, k, v):
                g = g.remove_vertices([v])
                forced.append(v)
                k -= 1
                if k < 0:
                    return ReducedMwcu(frozenset(forced), (), False)
                changed = True
                break
    comps = connected_components(g)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    home: Dict[int, int] = {}
    for t, c in classes.items():
        if home.setdefault(c, comp_of[t]) != comp_of[t]:
            return ReducedMwcu(frozenset(forced), (), False)
    limit = max(k * k + k, 1)
    parts: List[MwcuInstance] = []
    for i, comp in enumerate(comps):
        sub_classes = {t: c for t, c in classes.items() if t in comp}
        if len(set(sub_classes.values())) > limit:
            return ReducedMwcu(frozenset(forced), (), False)
        if len(set(sub_classes.values())) <= 1:
            continue
        parts.append(
            MwcuInstance(g.induced(comp), sub_classes, k, frozenset(inst.undeletable) & comp)
        )
    return ReducedMwcu(frozenset(forced), tuple(parts), True)


# ------------------------------------------------------------------ solver
@dataclass
class _Context:
    cfg: SolverConfig
    q: int
    t: int
    stats: Stats = field(default_factory=Stats)

    def seed(self, site: str) -> int:
        return derive_seed(self.cfg.seed, "mwcu", site)


@dataclass(frozen=True)
class _Border:
    """One border instance; ``classes`` maps each terminal to its class label."""

    graph: MultiGraph
    classes: Mapping[int, int]
    k: int
    undeletable: VertexSet
    border: VertexSet

    @property
    def terminals(self) -> VertexSet:
        return frozenset(self.classes)

    @property
    def blocked(self) -> VertexSet:
        return self.terminals | self.undeletable


def solve_border_mwcu(
    g: MultiGraph,
    classes: Mapping[int, int],
    k: int,
    undeletable: Iterable[int] = (),
    border: Iterable[int] = (),
    cfg: SolverConfig = SolverConfig(),
    stats: Optional[Stats] = None,
) -> Dict[MwcuBehavior, Optional[VertexSet]]:
    """Optimal deletion set (or ``None``) for every behavior of a connected border instance."""
    q = cfg.q_override or mwcu_q(k)
    t = cfg.t_override or mwcu_t(q, k)
    ctx = _Context(cfg, q, t)
    if t < mwcu_t(q, k):
        ctx.stats.exact = False
    inst = _Border(g, dict(classes), k, frozenset(undeletable) | frozenset(classes), frozenset(border))
    out = _solve(inst, ctx, 0, "root")
    if stats is not None:
        stats.merge(ctx.stats)
    return out


def _validated(inst: _Border, results):
    for beh, cut in results.items():
        if cut is not None and not satisfies_mwcu(inst.graph, inst.terminals, inst.undeletable, inst.border, inst.k, beh, cut):
            raise AssertionError(f"deletion set {sorted(cut)} does not realize {beh}")
    return results


def _solve(inst: _Border, ctx: _Context, depth: int, site: str) -> Dict[MwcuBehavior, Optional[VertexSet]]:
    g, k = inst.graph, inst.k
    if len(inst.border) > 2 * k:
        raise ValueError(f"{len(inst.border)} border terminals exceed 2k = {2 * k}")
    if inst.border & inst.blocked:
        raise ValueError("border terminals must be deletable")
    if len(g) and len(connected_components(g)) > 1:
        raise GraphInputError("border instances must be connected")
    ctx.stats.high("max_depth", depth)
    ctx.stats.bump("border_calls")
    behaviors = mwcu_behaviors(class_partition(inst.classes), inst.border)
    deletable = [v for v in g.vertices if v not in inst.blocked]
    sep = None
    if k > 0:
        sep = _find_separation(inst, ctx, site)
    if sep is not None:
        ctx.stats.bump("separations")
        res = _recurse(inst, sep, behaviors, ctx, depth, site)
        if res is not None:
            return _validated(inst, res)
        ctx.stats.bump("stalled_separations")
        if _subset_count(len(deletable), k) <= BRUTE_FALLBACK_LIMIT:
            ctx.stats.bump("brute_force")
            return _validated(inst, _brute_force(inst, behaviors))
        ctx.stats.exact = False
        return _validated(inst, _high_connectivity(inst, behaviors, ctx, site))
    if len(deletable) <= ctx.q * ctx.t + k:
        ctx.stats.bump("brute_force")
        return _validated(inst, _brute_force(inst, behaviors))
    return _validated(inst, _high_connectivity(inst, behaviors, ctx, site))


def _subset_count(n: int, k: int) -> int:
    return sum(math.comb(n, i) for i in range(min(n, k) + 1))


def _find_separation(inst: _Border, ctx: _Context, site: str):
    g, q, k = inst.graph, ctx.q, inst.k
    mode, delta = ctx.cfg.family_mode, ctx.cfg.delta
    sep = find_good_node_separation(g, inst.blocked, q, k, mode, ctx.seed(site + "/node"), delta)
    if sep is not None:
        sides = sorted((sep.side1, sep.side2), key=lambda s: (len(s), min(s)))
        return [(frozenset(side), sep.separator) for side in sides if len(side & inst.border) <= k]
    flower = find_flower_separation(g, inst.blocked, inst.border, q, k, mode, ctx.seed(site + "/flower"), delta)
    if flower is not None:
        return [(flower.petal_union(), flower.core)]
    return None


# ------------------------------------------------------------------ brute force
def _brute_force(inst: _Border, behaviors: Sequence[MwcuBehavior]) -> Dict[MwcuBehavior, Optional[VertexSet]]:
    want = set(behaviors)
    out: Dict[MwcuBehavior, Optional[VertexSet]] = {b: None for b in behaviors}
    g = inst.graph
    deletable = [v for v in g.vertices if v not in inst.blocked]
    target = class_partition(inst.classes)
    found = 0
    for size in range(min(inst.k, len(deletable)) + 1):
        for x in itertools.combinations(deletable, size):
            xs = frozenset(x)
            xb = xs & inst.border
            rest = sorted(inst.border - xs)
            for extra in set_partitions(rest):
                pairs = [(b[0], v) for b in extra for v in b[1:]]
                rel = realized_relation(g, inst.terminals, inst.border, xs, pairs)
                beh = MwcuBehavior(xb, extra, rel)
                if beh in want and out[beh] is None:
                    out[beh] = xs
                    found += 1
            if found == len(want):
                return out
    return out


# ------------------------------------------------------------------ recursion
def bypass(g: MultiGraph, v: int) -> MultiGraph:
    """Delete ``v`` and make its neighbourhood a clique (existing adjacencies are kept as they are)."""
    nbrs = sorted(g.neighbors(v))
    g = g.remove_vertices([v])
    missing = [(a, b) for a, b in itertools.combinations(nbrs, 2) if not g.multiplicity(a, b)]
    return g.add_edges(missing) if missing else g


def _recurse(inst: _Border, options, behaviors, ctx: _Context, depth: int, site: str):
    g, k = inst.graph, inst.k
    for n_opt, (vstar, _) in enumerate(options):
        zw = frozenset(g.vertex_boundary(vstar))
        w = vstar | zw
        sub_classes = {t: c for t, c in inst.classes.items() if t in w}
        sub = _Border(
            g.induced(w),
            sub_classes,
            k,
            frozenset(inst.undeletable & w),
            frozenset((inst.border | zw) & w),
        )
        assert len(sub.graph) < len(g), "recursion must shrink the graph"
        sub_res = _solve(sub, ctx, depth + 1, f"{site}/s{n_opt}")
        used: Set[int] = set(sub.border)
        for cut in sub_res.values():
            if cut is not None:
                used |= cut
        g2 = g
        removed = 0
        for v in sorted(vstar):
            if v in inst.terminals or v in used:
                continue
            g2 = bypass(g2, v)
            removed += 1
        cleaned = _clean_terminals(g2, inst.classes, vstar, k)
        if cleaned is None:
            ctx.stats.bump("cleanup_refutations")
            return {b: None for b in behaviors}
        g3, classes3, tmap, merged = cleaned
        if removed == 0 and merged == 0:
            continue
        ctx.stats.bump("bypassed", removed)
        undeletable3 = frozenset(v for v in inst.undeletable - set(tmap) if v in g3) | frozenset(classes3)
        nxt = _Border(g3, classes3, k, undeletable3, inst.border)
        res2 = _solve(nxt, ctx, depth + 1, f"{site}/r{n_opt}")
        out: Dict[MwcuBehavior, Optional[VertexSet]] = {}
        for beh in behaviors:
            out[beh] = res2.get(_map_behavior(beh, tmap))
        return out
    return None


def _map_behavior(beh: MwcuBehavior, tmap: Mapping[int, Optional[int]]) -> MwcuBehavior:
    blocks = []
    for block in beh.relation:
        image = {tmap.get(v, v) for v in block}
        image.discard(None)
        blocks.append(image)
    return MwcuBehavior(beh.deleted, beh.extra, _relation(blocks))


def _clean_terminals(g: MultiGraph, classes: Mapping[int, int], region: Iterable[int], k: int):
    """Identify forced-together terminal pairs of ``region`` and drop third duplicates.

    Returns ``None`` when two terminals of different classes can never be
    separated; otherwise the new graph, classes, the terminal map (``None`` for
    dropped terminals) and the number of terminals removed.
    """
    classes = dict(classes)
    tmap: Dict[int, Optional[int]] = {t: t for t in classes}
    region = set(region)
    merged = 0

    def follow(t: int) -> Optional[int]:
        while t in tmap and tmap[t] != t:
            nxt = tmap[t]
            if nxt is None:
                return None
            t = nxt
        return t

    while True:
        local = sorted(t for t in classes if t in region and t in g)
        hit = None
        for u, v in itertools.combinations(local, 2):
            if g.multiplicity(u, v) or len(set(g.neighbors(u)) & set(g.neighbors(v))) > k:
                hit = (u, v)
                break
        if hit is None:
            break
        u, v = hit
        if classes[u] != classes[v]:
            return None
        g, iota = merge_partition(g, [[u, v]])
        w = iota[u]
        cls = classes.pop(u)
        classes.pop(v)
        classes[w] = cls
        tmap[u] = w
        tmap[v] = w
        tmap[w] = w
        region |= {w}
        merged += 1
    while True:
        local = sorted(t for t in classes if t in region and t in g)
        groups: Dict[Tuple[int, FrozenSet[int]], List[int]] = {}
        for t in local:
            nb = frozenset(g.neighbors(t))
            if nb & set(classes):
                continue
            groups.setdefault((classes[t], nb), []).append(t)
        victim = next((ts[2] for ts in groups.values() if len(ts) >= 3), None)
        if victim is None:
            break
        g = g.remove_vertices([victim])
        classes.pop(victim)
        tmap[victim] = None
        merged += 1
    final = {t: follow(t) for t in tmap}
    return g, classes, final, merged


# ------------------------------------------------------------ high connectivity
def _high_connectivity(inst: _Border, behaviors, ctx: _Context, site: str):
    g, k = inst.graph, inst.k
    ctx.stats.bump("high_connectivity")
    deletable = [v for v in g.vertices if v not in inst.blocked]
    family = solver_family(deletable, ctx.q * ctx.t, k, ctx.cfg.family_mode, ctx.seed(site), "mwcu-interrogate", ctx.cfg.delta)
    best: Dict[MwcuBehavior, Optional[VertexSet]] = {b: None for b in behaviors}
    terminals = inst.terminals
    by_deleted: Dict[VertexSet, List[MwcuBehavior]] = {}
    for beh in behaviors:
        by_deleted.setdefault(beh.deleted, []).append(beh)

    def evaluate(s: FrozenSet[int]) -> Dict[MwcuBehavior, VertexSet]:
        found: Dict[MwcuBehavior, VertexSet] = {}
        for xb, group in by_deleted.items():
            if xb & s:
                continue
            keep = set(s) | set(inst.undeletable) | (set(inst.border) - xb)
            comps = connected_components(g.induced(keep))
            for beh in group:
                options: List[Set[int]] = [set()] + [set(c) for c in beh.relation]
                anchors = set(terminals) | (set(inst.border) - xb)
                for tbig in options:
                    marks = anchors - tbig
                    region = set().union(*(c for c in comps if c & marks)) if marks else set()
                    cand = frozenset(xb | g.vertex_boundary(region))
                    if len(cand) > k or (beh in found and not _better(cand, found[beh])):
                        continue
                    if satisfies_mwcu(g, terminals, inst.undeletable, inst.border, k, beh, cand):
                        found[beh] = cand
        return found

    members = list(family)
    ctx.stats.bump("hc_branches", len(members))
    for found in ordered_map(evaluate, members, ctx.cfg.threads):
        for beh, cand in found.items():
            if _better(cand, best[beh]):
                best[beh] = cand
    return best


# ------------------------------------------------------------------ front-ends
def subdivide_for_nodes(inst: MwcuInstance) -> Tuple[MwcuInstance, Dict[int, int]]:
    """Subdivide every edge copy; original vertices become undeletable.

    Returns the node instance and the map from subdivision vertex to edge id.
    """
    g = inst.graph
    index = g.edge_index()
    top = g.next_id
    edges = []
    back: Dict[int, int] = {}
    for n_edge, e in enumerate(g.edge_ids()):
        a, b = index[e]
        m = top + n_edge
        edges += [(a, m), (m, b)]
        back[m] = e
    h = MultiGraph.from_edges(list(g.vertices) + list(back), edges)
    node = MwcuInstance(h, dict(inst.classes), inst.k, frozenset(g.vertices), edge=False)
    return node, back


def solve_mwcu(inst: MwcuInstance, cfg: SolverConfig = SolverConfig()) -> SolutionReport:
    """Minimum deletion set (vertices, or edge ids when ``inst.edge``) realizing the classes."""
    unknown = [t for t in inst.classes if t not in inst.graph]
    if unknown:
        raise GraphInputError(f"unknown terminals {sorted(unknown)}")
    if inst.k < 0:
        raise GraphInputError("k must be non-negative")
    problem = "emwcu" if inst.edge else "nmwcu"
    stats = Stats()
    q = cfg.q_override or mwcu_q(inst.k)
    prov = provenance(cfg, q=q, t=cfg.t_override or mwcu_t(q, inst.k))
    if cfg.mode == "bruteforce":
        res = oracle_mwcu_edge(inst) if inst.edge else oracle_mwcu_node(inst)
        return _report(problem, YES if res.feasible else NO, list(res.solution), prov, stats)
    if inst.edge:
        node, back = subdivide_for_nodes(inst)
        rep = _solve_node(node, cfg, stats)
    else:
        back = None
        rep = _solve_node(inst, cfg, stats)
    answer, cut = rep
    if answer != YES:
        return _report(problem, answer, [], prov, stats)
    solution = sorted(back[v] for v in cut) if back is not None else sorted(cut)
    if not mwcu_valid(inst, solution):
        raise AssertionError("solver produced an invalid deletion set")
    return _report(problem, YES, solution, prov, stats)


def _solve_node(inst: MwcuInstance, cfg: SolverConfig, stats: Stats) -> Tuple[str, VertexSet]:
    reduced = reduce_equivalence_classes(inst)
    stats.bump("forced_deletions", len(reduced.forced))
    if not reduced.feasible:
        return NO, frozenset()
    total: Set[int] = set(reduced.forced)
    budget = inst.k - len(reduced.forced)
    for n_part, part in enumerate(reduced.parts):
        part_cfg = SolverConfig(cfg.mode, cfg.family, cfg.delta, derive_seed(cfg.seed, "part", n_part), cfg.q_override, cfg.t_override, cfg.threads)
        results = solve_border_mwcu(part.graph, part.classes, budget, part.undeletable, (), part_cfg, stats)
        target = MwcuBehavior(frozenset(), (), class_partition(part.classes))
        cut = results.get(target)
        if cut is None:
            answer = NO if cfg.deterministic and stats.exact else UNKNOWN
            return answer, frozenset()
        total |= cut
    if len(total) > inst.k:
        return NO, frozenset()
    return YES, frozenset(total)


def _report(problem, answer, solution, prov, stats: Stats) -> SolutionReport:
    prov = dict(prov)
    prov["exact"] = stats.exact and prov.get("family") != "randomized"
    return SolutionReport(problem, answer, list(solution), None, prov, stats.as_dict())
