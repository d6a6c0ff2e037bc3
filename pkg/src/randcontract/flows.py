"""Bounded augmenting-path flows, bounded edge and vertex cuts, and Karger contraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .graph import MultiGraph, _DisjointSet
from .seeds import derive_seed

Node = Hashable


@dataclass(frozen=True)
class CutResult:
    """Outcome of a bounded cut query.

    When ``exceeds`` is true more than ``bound`` disjoint paths exist and the other
    fields are empty.  Otherwise ``cut`` is a minimum cut (edge ids or vertices)
    and ``source_side`` the vertices reachable from the source after removing it.
    """

    exceeds: bool
    size: int = 0
    cut: FrozenSet[int] = frozenset()
    source_side: FrozenSet[int] = frozenset()


EXCEEDS = CutResult(True)


class FlowNetwork:
    """Directed network with integer capacities and bounded augmenting-path max-flow."""

    def __init__(self) -> None:
        self.cap: Dict[Node, Dict[Node, int]] = {}

    def add_node(self, x: Node) -> None:
        self.cap.setdefault(x, {})

    def add_arc(self, x: Node, y: Node, c: int) -> None:
        self.cap.setdefault(x, {})
        self.cap.setdefault(y, {})
        self.cap[x][y] = self.cap[x].get(y, 0) + c
        self.cap[y].setdefault(x, 0)

    def add_undirected(self, x: Node, y: Node, c: int) -> None:
        self.add_arc(x, y, c)
        self.add_arc(y, x, c)

    def max_flow(self, source: Node, sink: Node, limit: Optional[int] = None) -> int:
        """Augment unit by unit (BFS paths) until no path remains or ``limit`` is reached."""
        flow = 0
        cap = self.cap
        while limit is None or flow < limit:
            parent: Dict[Node, Node] = {source: source}
            queue = deque([source])
            while queue and sink not in parent:
                x = queue.popleft()
                for y, c in cap[x].items():
                    if c > 0 and y not in parent:
                        parent[y] = x
                        queue.append(y)
            if sink not in parent:
                break
            push = None
            y = sink
            while y != source:
                x = parent[y]
                push = cap[x][y] if push is None else min(push, cap[x][y])
                y = x
            if limit is not None:
                push = min(push, limit - flow)
            y = sink
            while y != source:
                x = parent[y]
                cap[x][y] -= push
                cap[y][x] += push
                y = x
            flow += push
        return flow

    def residual_reachable(self, source: Node) -> Set[Node]:
        seen = {source}
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y, c in self.cap[x].items():
                if c > 0 and y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen


def min_edge_cut_bounded(g: MultiGraph, u: int, v: int, k: int) -> CutResult:
    """Minimum ``u``-``v`` edge cut if it has at most ``k`` edges, else ``EXCEEDS``.

    Parallel edges act as separate unit-capacity edges.
    """
    if u == v:
        raise ValueError("source and sink must differ")
    if u not in g or v not in g:
        raise ValueError("unknown terminal vertex")
    net = FlowNetwork()
    for x in g.vertices:
        net.add_node(x)
    for (a, b), ids in g.pairs.items():
        net.add_undirected(a, b, len(ids))
    flow = net.max_flow(u, v, limit=k + 1)
    if flow > k:
        return EXCEEDS
    side = net.residual_reachable(u)
    cut = frozenset(i for (a, b), ids in g.pairs.items() if (a in side) != (b in side) for i in ids)
    return CutResult(False, flow, cut, frozenset(side))


def _split_network(g: MultiGraph, u: int, v: int, k: int, forbidden: Iterable[int]) -> FlowNetwork:
    big = k + 1
    blocked = set(forbidden)
    net = FlowNetwork()
    for x in g.vertices:
        if x in (u, v):
            c = 2 * big + 2
        elif x in blocked:
            c = big
        else:
            c = 1
        net.add_arc((x, 0), (x, 1), c)
    for (a, b) in g.pairs:
        net.add_arc((a, 1), (b, 0), big)
        net.add_arc((b, 1), (a, 0), big)
    return net


def min_vertex_cut_bounded(
    g: MultiGraph, u: int, v: int, k: int, forbidden: Iterable[int] = ()
) -> CutResult:
    """Minimum set of at most ``k`` vertices (avoiding ``forbidden``) separating ``u`` from ``v``.

    Adjacent ``u``, ``v`` can never be separated and yield ``EXCEEDS``.
    """
    if u == v:
        raise ValueError("source and sink must differ")
    blocked = set(forbidden)
    if u in blocked or v in blocked:
        raise ValueError("terminals cannot be forbidden")
    if g.multiplicity(u, v):
        return EXCEEDS
    net = _split_network(g, u, v, k, blocked)
    flow = net.max_flow((u, 1), (v, 0), limit=k + 1)
    if flow > k:
        return EXCEEDS
    reach = net.residual_reachable((u, 1))
    cut = frozenset(x for x in g.vertices if (x, 0) in reach and (x, 1) not in reach)
    side = frozenset(x for x in g.vertices if (x, 1) in reach and x not in cut)
    return CutResult(False, flow, cut, side)


def vertex_disjoint_paths(
    g: MultiGraph, sources: Iterable[int], sinks: Iterable[int], limit: int, allowed: Optional[Set[int]] = None
) -> List[List[int]]:
    """Up to ``limit`` vertex-disjoint paths from the source set to the sink set.

    Source and sink vertices themselves have unit capacity too, so every path
    starts at a distinct source and ends at a distinct sink.  Only vertices of
    ``allowed`` (default: all) are used.
    """
    src, dst = set(sources), set(sinks)
    verts = [x for x in g.vertices if allowed is None or x in allowed]
    vset = set(verts)
    net = FlowNetwork()
    S, T = ("s",), ("t",)
    for x in verts:
        net.add_arc((x, 0), (x, 1), 1)
        if x in src:
            net.add_arc(S, (x, 0), 1)
        if x in dst:
            net.add_arc((x, 1), T, 1)
    for (a, b) in g.pairs:
        if a in vset and b in vset:
            net.add_arc((a, 1), (b, 0), 1)
            net.add_arc((b, 1), (a, 0), 1)
    net.add_node(S)
    net.add_node(T)
    flow = net.max_flow(S, T, limit=limit)
    return _decompose(net, g, S, T, flow, vset, src)


def _decompose(net: FlowNetwork, g: MultiGraph, S, T, flow: int, vset: Set[int], src: Set[int]) -> List[List[int]]:
    # Flow on arc (x,1)->(y,0) equals the reverse residual capacity added by augmentation.
    used: Dict[int, List[int]] = {}
    for (a, b) in g.pairs:
        if a in vset and b in vset:
            for x, y in ((a, b), (b, a)):
                sent = 1 - net.cap[(x, 1)][(y, 0)]
                if sent > 0:
                    used.setdefault(x, []).append(y)
    # Cancel opposite flows, which can only arise as 2-cycles.
    for x in list(used):
        for y in list(used.get(x, [])):
            if x in used.get(y, []):
                used[x].remove(y)
                used[y].remove(x)
    starts = [x for x in sorted(src & vset) if net.cap[S].get((x, 0), 1) == 0]
    paths: List[List[int]] = []
    for x in starts:
        path = [x]
        cur = x
        while net.cap[(cur, 1)].get(T, 1) != 0 and used.get(cur):
            nxt = used[cur].pop()
            path.append(nxt)
            cur = nxt
        paths.append(path)
    return paths[:flow]


def karger_min_cut(g: MultiGraph, trials: int, seed: int) -> Tuple[int, FrozenSet[int]]:
    """Best cut over ``trials`` random contraction runs (multiplicity weighted).

    Each run contracts edges in a uniformly random order until two super-vertices
    remain.  Disconnected inputs return ``(0, frozenset())``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    verts = list(g.vertices)
    if len(verts) < 2:
        return 0, frozenset()
    edges: List[Tuple[int, int, int]] = [(a, b, i) for (a, b), ids in g.pairs.items() for i in ids]
    edges.sort(key=lambda e: e[2])
    ds = _DisjointSet(verts)
    comps = len(verts)
    for a, b, _ in edges:
        if ds.union(a, b):
            comps -= 1
    if comps > 1:
        return 0, frozenset()
    best: Optional[Tuple[int, FrozenSet[int]]] = None
    arr = np.array([(a, b) for a, b, _ in edges], dtype=np.int64)
    for trial in range(trials):
        rng = np.random.default_rng(derive_seed(seed, "karger", trial))
        order = rng.permutation(len(edges))
        ds = _DisjointSet(verts)
        left = len(verts)
        for j in order:
            if left == 2:
                break
            if ds.union(int(arr[j, 0]), int(arr[j, 1])):
                left -= 1
        cut = frozenset(i for a, b, i in edges if ds.find(a) != ds.find(b))
        if best is None or len(cut) < best[0]:
            best = (len(cut), cut)
    assert best is not None
    return best
