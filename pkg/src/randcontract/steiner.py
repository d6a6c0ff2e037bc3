"""Exact Steiner Cut via recursive understanding and a high-connectivity phase.

The border version asks, for every behavior on the border terminals, for a
minimum edge set realizing it.  Behaviors are solved all at once by brute
force on small graphs, by recursion on a good edge separation when one exists,
and otherwise by contracting an interrogating edge set and running a knapsack
table over the pieces hanging off the core vertex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _sp_components

from .config import NO, UNKNOWN, YES, SolutionReport, SolverConfig, Stats, provenance, steiner_q
from .families import solver_family
from .graph import (
    EdgeArrays,
    GraphInputError,
    MultiGraph,
    connected_components,
    contract_edges,
    sparsify,
)
from .instances import SteinerInstance, steiner_valid
from .oracles import oracle_steiner
from .parallel import ordered_map
from .seeds import derive_seed
from .separations import GoodEdgeSeparation, find_good_edge_separation

INF = math.inf
Relation = Tuple[Tuple[int, ...], ...]
Cut = FrozenSet[int]
BRUTE_FALLBACK_LIMIT = 200_000
VIEW_BATCH = 64


# ------------------------------------------------------------------ behaviors
@dataclass(frozen=True)
class SteinerBehavior:
    """Connectivity classes of the border, border terminals that see a terminal, and the terminal-component count."""

    relation: Relation
    alive: FrozenSet[int]
    s: int

    def __post_init__(self) -> None:
        for block in self.relation:
            hit = [v in self.alive for v in block]
            if any(hit) and not all(hit):
                raise ValueError("alive border terminals must be closed under the relation")

    def class_of(self) -> Dict[int, int]:
        return {v: i for i, block in enumerate(self.relation) for v in block}


def set_partitions(items: Sequence[int]) -> List[Relation]:
    """All partitions of ``items`` in restricted-growth-string order, blocks sorted."""
    items = sorted(items)
    out: List[Relation] = []

    def grow(i: int, codes: List[int], top: int) -> None:
        if i == len(items):
            blocks: Dict[int, List[int]] = {}
            for v, c in zip(items, codes):
                blocks.setdefault(c, []).append(v)
            out.append(tuple(tuple(blocks[c]) for c in sorted(blocks)))
            return
        for c in range(top + 2):
            codes.append(c)
            grow(i + 1, codes, max(top, c))
            codes.pop()

    grow(0, [], -1)
    return out


def steiner_behaviors(border: Iterable[int], k: int) -> List[SteinerBehavior]:
    """Relations by restricted growth strings, alive sets by class bitmask, counts ascending."""
    out: List[SteinerBehavior] = []
    for rel in set_partitions(sorted(border)):
        for mask in range(1 << len(rel)):
            alive = frozenset(v for i, block in enumerate(rel) if mask >> i & 1 for v in block)
            for s in range(k + 2):
                out.append(SteinerBehavior(rel, alive, s))
    return out


def realized_behavior(g: MultiGraph, terminals: Iterable[int], border: Iterable[int], cut: Iterable[int]) -> SteinerBehavior:
    """The behavior that deleting ``cut`` produces, read off by direct simulation."""
    comp: Dict[int, int] = {}
    for i, c in enumerate(connected_components(g.remove_edges(cut))):
        for v in c:
            comp[v] = i
    with_terminal = {comp[t] for t in terminals}
    groups: Dict[int, List[int]] = {}
    for v in sorted(border):
        groups.setdefault(comp[v], []).append(v)
    relation = tuple(sorted(tuple(b) for b in groups.values()))
    alive = frozenset(v for v in border if comp[v] in with_terminal)
    return SteinerBehavior(relation, alive, len(with_terminal))


def satisfies(g: MultiGraph, terminals: Iterable[int], border: Iterable[int], k: int, behavior: SteinerBehavior, cut: Iterable[int]) -> bool:
    x = set(cut)
    if len(x) > k or not x <= set(g.edge_ids()):
        return False
    return realized_behavior(g, terminals, border, x) == behavior


def _better(cand: Cut, best: Optional[Cut]) -> bool:
    return best is None or (len(cand), sorted(cand)) < (len(best), sorted(best))


# ------------------------------------------------------------------ dp table
def steiner_dp(components: Sequence[Tuple[int, int]], length: int) -> List[List[List[float]]]:
    """``T[j][l][t]``: cheapest choice among the first ``j`` pieces isolating exactly ``l``
    terminals, where ``t`` (0 or 1) records whether an unchosen piece still holds a terminal.

    ``components`` lists ``(a_i, b_i)`` = (edge cost, terminal count) per piece.
    """
    p = len(components)
    table = [[[INF, INF] for _ in range(length + 1)] for _ in range(p + 1)]
    table[0][0][0] = 0
    for j in range(1, p + 1):
        a, b = components[j - 1]
        prev, cur = table[j - 1], table[j]
        for ell in range(length + 1):
            take_bot = a + prev[ell - b][0] if ell >= b else INF
            take_top = a + prev[ell - b][1] if ell >= b else INF
            if b == 0:
                cur[ell][0] = min(prev[ell][0], take_bot)
                cur[ell][1] = min(prev[ell][1], take_top)
            else:
                cur[ell][0] = take_bot
                cur[ell][1] = min(prev[ell][0], prev[ell][1], take_top)
    return table


def steiner_dp_extract(
    table: List[List[List[float]]], components: Sequence[Tuple[int, int]], length: int, top: int
) -> Optional[List[int]]:
    """Follow the recurrences backwards to recover the chosen piece indices (0-based)."""
    if table[len(components)][length][top] == INF:
        return None
    chosen: List[int] = []
    ell, t = length, top
    for j in range(len(components), 0, -1):
        a, b = components[j - 1]
        prev = table[j - 1]
        value = table[j][ell][t]
        take = a + prev[ell - b][t] if ell >= b else INF
        if b == 0 and prev[ell][t] == value:
            continue
        if b > 0 and t == 1 and prev[ell][0] == value:
            t = 0
            continue
        if b > 0 and t == 1 and prev[ell][1] == value:
            continue
        assert take == value, "dp backlink mismatch"
        chosen.append(j - 1)
        ell -= b
    chosen.reverse()
    return chosen


# ------------------------------------------------------------------ context
@dataclass
class _Context:
    cfg: SolverConfig
    q: int
    stats: Stats = field(default_factory=Stats)

    def seed(self, site: str) -> int:
        return derive_seed(self.cfg.seed, "steiner", site)


def _validated(g, terminals, border, k, results: Dict[SteinerBehavior, Optional[Cut]]) -> Dict[SteinerBehavior, Optional[Cut]]:
    for beh, cut in results.items():
        if cut is not None and not satisfies(g, terminals, border, k, beh, cut):
            raise AssertionError(f"solution {sorted(cut)} does not realize {beh}")
    return results


def solve_border_steiner(
    g: MultiGraph,
    terminals: Iterable[int],
    k: int,
    border: Iterable[int],
    cfg: SolverConfig = SolverConfig(),
    q: Optional[int] = None,
    stats: Optional[Stats] = None,
) -> Dict[SteinerBehavior, Optional[Cut]]:
    """Optimal solution (or ``None``) for every behavior of the border instance."""
    ctx = _Context(cfg, q if q is not None else (cfg.q_override or steiner_q(k)))
    out = _solve(g, frozenset(terminals), k, frozenset(border), ctx, 0, "root")
    if stats is not None:
        stats.merge(ctx.stats)
    return out


def _solve(g: MultiGraph, terminals: FrozenSet[int], k: int, border: FrozenSet[int], ctx: _Context, depth: int, site: str):
    if len(border) > 2 * k:
        raise ValueError(f"{len(border)} border terminals exceed 2k = {2 * k}")
    if len(g) and len(connected_components(g)) > 1:
        raise GraphInputError("border instances must be connected")
    ctx.stats.high("max_depth", depth)
    ctx.stats.bump("border_calls")
    behaviors = steiner_behaviors(border, k)
    q = ctx.q
    if len(g) <= (k + 1) * q:
        ctx.stats.bump("brute_force")
        return _validated(g, terminals, border, k, _brute_force(g, terminals, k, border, behaviors))
    sep = find_good_edge_separation(g, q, k, ctx.cfg.family_mode, ctx.seed(site + "/sep"), ctx.cfg.delta)
    if sep is not None:
        ctx.stats.bump("separations")
        res = _recurse(g, terminals, k, border, sep, behaviors, ctx, depth, site)
        if res is not None:
            return _validated(g, terminals, border, k, res)
        ctx.stats.bump("stalled_separations")
        if _subset_count(g.num_edges, k) <= BRUTE_FALLBACK_LIMIT:
            ctx.stats.bump("brute_force")
            return _validated(g, terminals, border, k, _brute_force(g, terminals, k, border, behaviors))
        ctx.stats.exact = False
    return _validated(g, terminals, border, k, _high_connectivity(g, terminals, k, border, behaviors, ctx, site))


def _subset_count(m: int, k: int) -> int:
    return sum(math.comb(m, i) for i in range(min(m, k) + 1))


# ------------------------------------------------------------------ brute force
def _brute_force(g, terminals, k, border, behaviors) -> Dict[SteinerBehavior, Optional[Cut]]:
    """One lexicographic pass over edge subsets records the first set realizing each behavior."""
    want = set(behaviors)
    out: Dict[SteinerBehavior, Optional[Cut]] = {b: None for b in behaviors}
    arrays = EdgeArrays(g)
    ids = arrays.edge_ids
    pos = arrays.position
    tpos = np.asarray([pos[t] for t in sorted(terminals)], dtype=np.int64)
    border_sorted = sorted(border)
    bpos = [pos[v] for v in border_sorted]
    found = 0
    for size in range(min(k, len(ids)) + 1):
        for x in itertools.combinations(range(len(ids)), size):
            mask = np.ones(len(ids), dtype=bool)
            mask[list(x)] = False
            _, lab = arrays.labels(mask)
            live = set(lab[tpos].tolist())
            groups: Dict[int, List[int]] = {}
            for v, p in zip(border_sorted, bpos):
                groups.setdefault(int(lab[p]), []).append(v)
            relation = tuple(sorted(tuple(b) for b in groups.values()))
            alive = frozenset(v for v, p in zip(border_sorted, bpos) if lab[p] in live)
            beh = SteinerBehavior(relation, alive, len(live))
            if beh in want and out[beh] is None:
                out[beh] = frozenset(int(ids[i]) for i in x)
                found += 1
                if found == len(want):
                    return out
    return out


# ------------------------------------------------------------------ recursion
def _recurse(g, terminals, k, border, sep: GoodEdgeSeparation, behaviors, ctx: _Context, depth: int, site: str):
    """Solve the small side for all behaviors, contract its unused edges and solve the rest.

    Returns ``None`` when neither eligible side makes the graph smaller.
    """
    index = g.edge_index()
    endpoints = {v for e in sep.crossing for v in index[e]}
    sides = sorted((sep.side1, sep.side2), key=lambda s: (len(s), min(s)))
    for n_side, side in enumerate(sides):
        if len(border & side) > k:
            continue
        inner_border = frozenset((border & side) | (endpoints & side))
        sub = sparsify(g.induced(side), k)
        assert len(sub) < len(g), "recursion must shrink the graph"
        sub_res = _solve(sub, terminals & side, k, inner_border, ctx, depth + 1, f"{site}/s{n_side}")
        used: Set[int] = set()
        for cut in sub_res.values():
            if cut is not None:
                used |= cut
        inside = [i for (a, b), ids in g.pairs.items() if a in side and b in side for i in ids]
        drop = [i for i in inside if i not in used]
        g2, iota = contract_edges(g, drop)
        if len(g2) >= len(g):
            continue
        g2 = sparsify(g2, k)
        t2 = frozenset(iota[t] for t in terminals)
        b2 = frozenset(iota[v] for v in border)
        ctx.stats.bump("contractions")
        res2 = _solve(g2, t2, k, b2, ctx, depth + 1, f"{site}/c{n_side}")
        out: Dict[SteinerBehavior, Optional[Cut]] = {}
        for beh in behaviors:
            image = transform_behavior(beh, iota)
            out[beh] = None if image is None else res2.get(image)
        return out
    return None


def transform_behavior(beh: SteinerBehavior, iota: Mapping[int, int]) -> Optional[SteinerBehavior]:
    """Project a behavior through a contraction map; ``None`` if two classes get merged."""
    cls = beh.class_of()
    owner: Dict[int, int] = {}
    for v, c in cls.items():
        if owner.setdefault(iota[v], c) != c:
            return None
    relation = tuple(sorted(tuple(sorted({iota[v] for v in block})) for block in beh.relation))
    alive = frozenset(iota[v] for v in beh.alive)
    return SteinerBehavior(relation, alive, beh.s)


# ------------------------------------------------------------ high connectivity
@dataclass
class _View:
    """The contracted graph ``H`` of one family member, in array form.

    Vertices of ``H`` are component labels; all heavy labels become ``core``.
    ``piece`` gives each non-core ``H`` vertex its component of ``H - core``;
    ``cost`` and ``term_count`` are the per-piece ``(a_i, b_i)``.
    """

    hv: np.ndarray
    core: int
    piece: Dict[int, int]
    cost: List[int]
    term_count: List[int]
    has_terminal: np.ndarray
    edge_piece: np.ndarray


def _make_view(arrays: EdgeArrays, mask: np.ndarray, q: int, tpos: np.ndarray) -> Optional[_View]:
    count, lab = arrays.labels(mask)
    sizes = np.bincount(lab, minlength=count)
    heavy = sizes > q
    if not heavy.any():
        return None
    core = count
    hv = np.where(heavy[lab], core, lab)
    hs, hd = hv[arrays.src], hv[arrays.dst]
    live = hs != hd
    off = live & (hs != core) & (hd != core)
    mat = coo_matrix((np.ones(int(off.sum()), dtype=np.int8), (hs[off], hd[off])), shape=(count + 1, count + 1))
    _, cl = _sp_components(mat, directed=False)
    light = np.flatnonzero(~heavy)
    uniq, inverse = np.unique(cl[light], return_inverse=True)
    piece = {int(x): int(i) for x, i in zip(light, inverse)}
    p = len(uniq)
    pid = np.full(count + 1, -1, dtype=np.int64)
    pid[light] = inverse
    other = np.where(hs == core, hd, hs)
    edge_piece = np.where(live, pid[other], -1)
    cost = np.bincount(edge_piece[live], minlength=p).tolist() if p else []
    has_terminal = np.zeros(count + 1, dtype=bool)
    has_terminal[hv[tpos]] = True
    term_count = np.bincount(pid[light][has_terminal[light]], minlength=p).tolist() if p else []
    return _View(hv, core, piece, cost, term_count, has_terminal, edge_piece)


def _high_connectivity(g, terminals, k, border, behaviors, ctx: _Context, site: str):
    results: Dict[SteinerBehavior, Optional[Cut]] = {}
    pending: List[SteinerBehavior] = []
    for beh in behaviors:
        if satisfies(g, terminals, border, k, beh, ()):
            results[beh] = frozenset()
        else:
            results[beh] = None
            pending.append(beh)
    if not pending or k == 0:
        return results
    ctx.stats.bump("high_connectivity")
    q = ctx.q
    arrays = EdgeArrays(g)
    family = solver_family(g.edge_ids(), 3 * q * k, k, ctx.cfg.family_mode, ctx.seed(site), "steiner-interrogate", ctx.cfg.delta)
    pos = arrays.position
    tpos = np.asarray([pos[t] for t in sorted(terminals)], dtype=np.int64)
    border_pos = {v: pos[v] for v in border}
    seen: Set[bytes] = set()
    best: Dict[SteinerBehavior, Optional[Cut]] = {b: None for b in pending}

    def evaluate(view: _View) -> Dict[SteinerBehavior, Cut]:
        found: Dict[SteinerBehavior, Cut] = {}
        for beh in pending:
            cand = _branch(view, beh, k, border_pos, arrays)
            if cand is not None:
                found[beh] = cand
        return found

    batch: List[_View] = []

    def flush() -> None:
        for found in ordered_map(evaluate, batch, ctx.cfg.threads):
            for beh, cand in found.items():
                if _better(cand, best[beh]) and satisfies(g, terminals, border, k, beh, cand):
                    best[beh] = cand
        batch.clear()

    universe = np.asarray(family.universe, dtype=np.int64)
    aligned = np.array_equal(universe, arrays.edge_ids)
    for member in family.iter_masks():
        mask = member if aligned else np.isin(arrays.edge_ids, universe[member])
        ctx.stats.bump("hc_branches")
        view = _make_view(arrays, mask, q, tpos)
        if view is None:
            continue
        key = view.hv.astype(np.int32).tobytes()
        if key in seen:
            continue
        seen.add(key)
        ctx.stats.bump("hc_distinct_branches")
        batch.append(view)
        if len(batch) >= VIEW_BATCH:
            flush()
    flush()
    for beh in pending:
        results[beh] = best[beh]
    return results


def _branch(view: _View, beh: SteinerBehavior, k: int, border_pos: Mapping[int, int], arrays: EdgeArrays) -> Optional[Cut]:
    """Best cut for one behavior in one contracted branch, or ``None``."""
    core = view.core
    cls = beh.class_of()
    # Border terminals projected onto H vertices; merged ones must agree on their class.
    h_class: Dict[int, int] = {}
    for v, p in border_pos.items():
        h = int(view.hv[p])
        if h_class.setdefault(h, cls[v]) != cls[v]:
            return None
    alive_h = {int(view.hv[border_pos[v]]) for v in beh.alive}
    classes: Dict[int, Set[int]] = {}
    for h, c in h_class.items():
        classes.setdefault(c, set()).add(h)
    if core in h_class:
        options = [classes[h_class[core]]]
    else:
        options = [set()] + [classes[c] for c in sorted(classes)]
    border_pieces: Dict[int, Set[int]] = {}
    for h in h_class:
        if h != core:
            border_pieces.setdefault(view.piece[h], set()).add(h)
    best: Optional[Cut] = None
    for d in options:
        cand = _branch_with_core_class(view, beh, k, d, classes, h_class, alive_h, border_pieces, arrays)
        if cand is not None and _better(cand, best):
            best = cand
    return best


def _branch_with_core_class(view, beh, k, d, classes, h_class, alive_h, border_pieces, arrays) -> Optional[Cut]:
    core = view.core
    removed: List[int] = []
    s0 = 0
    cost0 = 0
    core_terminal = bool(view.has_terminal[core])
    for i, hs in sorted(border_pieces.items()):
        inside = hs & d
        if inside and hs - d:
            return None
        if inside:
            core_terminal = core_terminal or view.term_count[i] > 0
        else:
            removed.append(i)
            cost0 += view.cost[i]
            s0 += view.term_count[i]
    if cost0 > k:
        return None
    for c, hs in classes.items():
        if hs != d and len(hs) > 1:
            return None
    for h in h_class:
        if h in d:
            continue
        if (h in alive_h) != bool(view.has_terminal[h]):
            return None
    dead_core = bool(d) and not (d & alive_h)
    if dead_core and core_terminal:
        return None
    free = [i for i in range(len(view.cost)) if i not in border_pieces]
    comps = [(view.cost[i], view.term_count[i]) for i in free]
    if dead_core:
        tops = [0]
    elif not core_terminal:
        tops = [1]
    else:
        tops = [0, 1]
    best: Optional[Cut] = None
    for top in tops:
        length = beh.s - s0 - int(core_terminal or top == 1)
        if length < 0:
            continue
        table = steiner_dp(comps, length)
        value = table[len(comps)][length][top]
        if value + cost0 > k:
            continue
        chosen = steiner_dp_extract(table, comps, length, top)
        assert chosen is not None
        pieces = set(removed) | {free[i] for i in chosen}
        sel = np.isin(view.edge_piece, list(pieces)) if pieces else np.zeros(len(view.edge_piece), dtype=bool)
        cand = frozenset(int(e) for e in arrays.edge_ids[sel])
        if _better(cand, best):
            best = cand
    return best


# ------------------------------------------------------------------ front-end
def connect_with_gadget(inst: SteinerInstance) -> Tuple[SteinerInstance, int]:
    """Attach every component to a ``(k+2)``-clique through one vertex (a terminal when available).

    Returns the connected instance and the number of terminal components absorbed.
    """
    g, k = inst.graph, inst.k
    comps = connected_components(g)
    with_terminal = [c for c in comps if c & inst.terminals]
    if len(comps) <= 1:
        return inst, 0
    g2, clique = g.add_vertices(k + 2)
    anchors = [min(c & inst.terminals) if c & inst.terminals else min(c) for c in comps]
    edges = list(itertools.combinations(clique, 2)) + [(x, a) for x in clique for a in anchors]
    g2 = g2.add_edges(edges)
    shift = max(0, len(with_terminal) - 1)
    return SteinerInstance(g2, inst.terminals, inst.s - shift, k), shift


def solve_steiner(inst: SteinerInstance, cfg: SolverConfig = SolverConfig()) -> SolutionReport:
    """Minimum edge set leaving at least ``s`` components that contain a terminal."""
    if inst.s < 1:
        raise GraphInputError("s must be at least 1")
    if inst.k < 0:
        raise GraphInputError("k must be non-negative")
    unknown = [t for t in inst.terminals if t not in inst.graph]
    if unknown:
        raise GraphInputError(f"unknown terminals {sorted(unknown)}")
    stats = Stats()
    q = cfg.q_override or steiner_q(inst.k)
    prov = provenance(cfg, q=q)
    if cfg.mode == "bruteforce":
        res = oracle_steiner(inst)
        answer = YES if res.feasible else NO
        return _report(inst, answer, list(res.solution), prov, stats)
    base = len({i for i, c in enumerate(connected_components(inst.graph)) if c & inst.terminals})
    if base >= inst.s:
        return _report(inst, YES, [], prov, stats)
    if not inst.terminals:
        return _report(inst, NO, [], prov, stats)
    work, _ = connect_with_gadget(inst)
    if work.s > work.k + 1:
        return _report(inst, NO, [], prov, stats)
    g = sparsify(work.graph, work.k)
    results = solve_border_steiner(g, work.terminals, work.k, (), cfg, q, stats)
    best: Optional[Cut] = None
    for beh, cut in results.items():
        if beh.s >= work.s and cut is not None and _better(cut, best):
            best = cut
    if best is not None:
        if not steiner_valid(inst, best):
            raise AssertionError("solver produced an invalid cut")
        return _report(inst, YES, sorted(best), prov, stats)
    answer = NO if cfg.deterministic and stats.exact else UNKNOWN
    return _report(inst, answer, [], prov, stats)


def _report(inst, answer, solution, prov, stats: Stats) -> SolutionReport:
    prov = dict(prov)
    prov["exact"] = stats.exact and prov.get("family") != "randomized"
    return SolutionReport("steiner", answer, list(solution), None, prov, stats.as_dict())
