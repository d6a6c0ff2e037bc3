"""Loop-free multigraphs with contraction, identification and sparsification.

Every parallel copy of an edge carries its own integer id, so a cut found in a
contracted or sparsified graph can always be mapped back to edges of the graph
it came from.  Vertices carry optional string tags that are united when
vertices are merged.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

Pair = Tuple[int, int]

TERMINAL = "terminal"
BORDER = "border"
UNDELETABLE = "undeletable"


class GraphInputError(ValueError):
    """Raised when an operation references vertices or edges that do not exist."""


def _pair(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


class MultiGraph:
    """Immutable undirected multigraph without loops.

    ``pairs`` maps each unordered vertex pair ``(u, v)`` with ``u < v`` to the
    sorted tuple of ids of the parallel edges joining them.  The multiplicity of
    a pair is the length of that tuple.
    """

    __slots__ = ("_vertices", "_pairs", "_adj", "_tags", "next_id", "_edge_index")

    def __init__(
        self,
        vertices: Iterable[int],
        pairs: Mapping[Pair, Sequence[int]] | None = None,
        tags: Mapping[int, Iterable[str]] | None = None,
        next_id: Optional[int] = None,
    ) -> None:
        verts = sorted(set(vertices))
        vset = set(verts)
        clean: Dict[Pair, Tuple[int, ...]] = {}
        adj: Dict[int, Dict[int, int]] = {v: {} for v in verts}
        for (a, b), ids in (pairs or {}).items():
            if a == b or not ids:
                continue
            if a not in vset or b not in vset:
                raise GraphInputError(f"edge ({a}, {b}) uses an unknown vertex")
            key = _pair(a, b)
            merged = tuple(sorted(clean.get(key, ()) + tuple(ids)))
            clean[key] = merged
            adj[key[0]][key[1]] = len(merged)
            adj[key[1]][key[0]] = len(merged)
        self._vertices: Tuple[int, ...] = tuple(verts)
        self._pairs = clean
        self._adj = adj
        self._tags: Dict[int, FrozenSet[str]] = {
            v: frozenset(t) for v, t in (tags or {}).items() if v in vset and t
        }
        top = max(verts) + 1 if verts else 0
        self.next_id = max(top, next_id or 0)
        self._edge_index: Optional[Dict[int, Pair]] = None

    @classmethod
    def from_edges(
        cls,
        vertices: Iterable[int],
        edges: Iterable[Pair],
        tags: Mapping[int, Iterable[str]] | None = None,
    ) -> "MultiGraph":
        """Build a graph whose ``i``-th listed edge receives id ``i``."""
        pairs: Dict[Pair, List[int]] = {}
        for i, (u, v) in enumerate(edges):
            if u == v:
                continue
            pairs.setdefault(_pair(u, v), []).append(i)
        return cls(vertices, pairs, tags)

    # ------------------------------------------------------------------ queries
    @property
    def vertices(self) -> Tuple[int, ...]:
        return self._vertices

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, v: object) -> bool:
        return v in self._adj

    def __repr__(self) -> str:
        return f"MultiGraph(n={len(self._vertices)}, pairs={len(self._pairs)}, edges={self.num_edges})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return (
            self._vertices == other._vertices
            and self._pairs == other._pairs
            and self._tags == other._tags
        )

    def __hash__(self) -> int:
        return hash((self._vertices, tuple(sorted(self._pairs.items()))))

    @property
    def pairs(self) -> Mapping[Pair, Tuple[int, ...]]:
        return self._pairs

    @property
    def num_edges(self) -> int:
        return sum(len(ids) for ids in self._pairs.values())

    def edge_ids(self) -> List[int]:
        return sorted(i for ids in self._pairs.values() for i in ids)

    def edge_index(self) -> Dict[int, Pair]:
        """Map from edge id to the pair it joins."""
        if self._edge_index is None:
            self._edge_index = {i: p for p, ids in self._pairs.items() for i in ids}
        return self._edge_index

    def endpoints(self, edge_id: int) -> Pair:
        try:
            return self.edge_index()[edge_id]
        except KeyError:
            raise GraphInputError(f"unknown edge id {edge_id}") from None

    def multiplicity(self, u: int, v: int) -> int:
        return self._adj.get(u, {}).get(v, 0)

    def neighbors(self, v: int) -> Mapping[int, int]:
        """Neighbours of ``v`` mapped to the multiplicity of the joining pair."""
        return self._adj[v]

    def degree(self, v: int) -> int:
        return sum(self._adj[v].values())

    def tags(self, v: int) -> FrozenSet[str]:
        return self._tags.get(v, frozenset())

    def tagged(self, tag: str) -> Set[int]:
        return {v for v, t in self._tags.items() if tag in t}

    @property
    def tag_map(self) -> Mapping[int, FrozenSet[str]]:
        return self._tags

    def incident_ids(self, vs: Iterable[int]) -> Set[int]:
        """Ids of edges with both endpoints in ``vs``."""
        inside = set(vs)
        return {i for (a, b), ids in self._pairs.items() if a in inside and b in inside for i in ids}

    def boundary_pairs(self, vs: Iterable[int]) -> List[Pair]:
        inside = set(vs)
        return [p for p in self._pairs if (p[0] in inside) != (p[1] in inside)]

    def vertex_boundary(self, vs: Iterable[int]) -> Set[int]:
        """Open neighbourhood N(vs)."""
        inside = set(vs)
        out: Set[int] = set()
        for v in inside:
            out.update(w for w in self._adj[v] if w not in inside)
        return out

    # ------------------------------------------------------------- derivations
    def with_tags(self, tags: Mapping[int, Iterable[str]]) -> "MultiGraph":
        return MultiGraph(self._vertices, self._pairs, tags, self.next_id)

    def add_tag(self, vs: Iterable[int], tag: str) -> "MultiGraph":
        new = dict(self._tags)
        for v in vs:
            new[v] = self.tags(v) | {tag}
        return self.with_tags(new)

    def induced(self, vs: Iterable[int]) -> "MultiGraph":
        keep = set(vs)
        pairs = {p: ids for p, ids in self._pairs.items() if p[0] in keep and p[1] in keep}
        tags = {v: t for v, t in self._tags.items() if v in keep}
        return MultiGraph(keep, pairs, tags, self.next_id)

    def remove_vertices(self, vs: Iterable[int]) -> "MultiGraph":
        drop = set(vs)
        return self.induced(v for v in self._vertices if v not in drop)

    def remove_edges(self, edge_ids: Iterable[int]) -> "MultiGraph":
        drop = set(edge_ids)
        pairs = {}
        for p, ids in self._pairs.items():
            rest = tuple(i for i in ids if i not in drop)
            if rest:
                pairs[p] = rest
        return MultiGraph(self._vertices, pairs, self._tags, self.next_id)

    def remove_pairs(self, drop: Iterable[Pair]) -> "MultiGraph":
        gone = {_pair(*p) for p in drop}
        pairs = {p: ids for p, ids in self._pairs.items() if p not in gone}
        return MultiGraph(self._vertices, pairs, self._tags, self.next_id)

    def add_vertices(self, count: int, tags: Iterable[str] = ()) -> Tuple["MultiGraph", List[int]]:
        new = list(range(self.next_id, self.next_id + count))
        tag_map = dict(self._tags)
        for v in new:
            if tags:
                tag_map[v] = frozenset(tags)
        g = MultiGraph(list(self._vertices) + new, self._pairs, tag_map, self.next_id + count)
        return g, new

    def add_edges(self, edges: Iterable[Pair], first_id: Optional[int] = None) -> "MultiGraph":
        """Add edges with fresh ids starting after the largest id in use."""
        start = first_id if first_id is not None else (max(self.edge_index(), default=-1) + 1)
        pairs = {p: list(ids) for p, ids in self._pairs.items()}
        for offset, (u, v) in enumerate(edges):
            if u == v:
                continue
            pairs.setdefault(_pair(u, v), []).append(start + offset)
        return MultiGraph(self._vertices, pairs, self._tags, self.next_id)

    def relabel_edges_dense(self) -> "MultiGraph":
        """Renumber edge ids to 0..m-1 preserving their relative order."""
        order = {old: new for new, old in enumerate(self.edge_ids())}
        pairs = {p: tuple(order[i] for i in ids) for p, ids in self._pairs.items()}
        return MultiGraph(self._vertices, pairs, self._tags, self.next_id)


ContractionMap = Dict[int, int]


class _DisjointSet:
    __slots__ = ("parent",)

    def __init__(self, items: Iterable[int]) -> None:
        self.parent = {x: x for x in items}

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def merge_partition(g: MultiGraph, blocks: Iterable[Iterable[int]]) -> Tuple[MultiGraph, ContractionMap]:
    """Merge every listed block into one fresh vertex; other vertices keep their ids.

    Singleton blocks are left untouched.  New ids are assigned in the order of
    the smallest member of each block, so the result is deterministic.
    """
    iota: ContractionMap = {v: v for v in g.vertices}
    real = sorted((sorted(set(b)) for b in blocks if len(set(b)) > 1), key=lambda b: b[0])
    next_id = g.next_id
    for block in real:
        for v in block:
            if v not in iota:
                raise GraphInputError(f"unknown vertex {v}")
            iota[v] = next_id
        next_id += 1
    pairs: Dict[Pair, List[int]] = {}
    for (a, b), ids in g.pairs.items():
        ia, ib = iota[a], iota[b]
        if ia == ib:
            continue
        pairs.setdefault(_pair(ia, ib), []).extend(ids)
    tags: Dict[int, Set[str]] = {}
    for v, t in g.tag_map.items():
        tags.setdefault(iota[v], set()).update(t)
    new = MultiGraph(set(iota.values()), pairs, tags, next_id)
    return new, iota


def contract_edges(g: MultiGraph, edge_ids: Iterable[int]) -> Tuple[MultiGraph, ContractionMap]:
    """Contract a set of edges (by id) in one pass.

    Components of ``(V, D)`` become single fresh vertices, loops disappear and
    parallel edges are kept.  Returns the contracted graph and the map from the
    vertices of ``g`` to the vertices of the result.
    """
    index = g.edge_index()
    ds = _DisjointSet(g.vertices)
    for e in edge_ids:
        if e not in index:
            raise GraphInputError(f"unknown edge id {e}")
        ds.union(*index[e])
    return merge_partition(g, _blocks(ds, g.vertices))


def contract_pairs(g: MultiGraph, pairs: Iterable[Pair]) -> Tuple[MultiGraph, ContractionMap]:
    """Contract every listed vertex pair together with all its parallel copies."""
    ds = _DisjointSet(g.vertices)
    for u, v in pairs:
        if u not in g or v not in g:
            raise GraphInputError(f"unknown pair ({u}, {v})")
        ds.union(u, v)
    return merge_partition(g, _blocks(ds, g.vertices))


def identify_vertices(g: MultiGraph, group: Iterable[int]) -> Tuple[MultiGraph, ContractionMap]:
    """Merge all vertices of ``group`` into one vertex (a star added then contracted)."""
    members = sorted(set(group))
    if not members:
        raise GraphInputError("cannot identify an empty group")
    for v in members:
        if v not in g:
            raise GraphInputError(f"unknown vertex {v}")
    return merge_partition(g, [members])


def _blocks(ds: _DisjointSet, vertices: Iterable[int]) -> List[List[int]]:
    groups: Dict[int, List[int]] = {}
    for v in vertices:
        groups.setdefault(ds.find(v), []).append(v)
    return list(groups.values())


def compose(first: ContractionMap, second: ContractionMap) -> ContractionMap:
    """The map ``v -> second[first[v]]``."""
    return {v: second[w] for v, w in first.items()}


def preimages(iota: ContractionMap) -> Dict[int, List[int]]:
    out: Dict[int, List[int]] = {}
    for v in sorted(iota):
        out.setdefault(iota[v], []).append(v)
    return out


def cap_multiplicity(g: MultiGraph, k: int) -> MultiGraph:
    """Keep at most ``k + 1`` parallel copies (the smallest ids) of every pair."""
    cap = k + 1
    pairs = {p: ids[:cap] for p, ids in g.pairs.items()}
    return MultiGraph(g.vertices, pairs, g.tag_map, g.next_id)


def sparsify(g: MultiGraph, k: int) -> MultiGraph:
    """Union of ``k + 1`` successively peeled spanning forests.

    Every parallel copy counts as a separate edge.  A dropped edge has ``k + 1``
    edge-disjoint paths between its endpoints in the kept edges, so every edge
    cut of size at most ``k`` keeps its exact separating power.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    remaining: Dict[Pair, List[int]] = {p: list(ids) for p, ids in g.pairs.items()}
    kept: Dict[Pair, List[int]] = {}
    for _ in range(k + 1):
        if not remaining:
            break
        ds = _DisjointSet(g.vertices)
        for p in sorted(remaining):
            ids = remaining[p]
            if ds.union(*p):
                kept.setdefault(p, []).append(ids.pop(0))
        remaining = {p: ids for p, ids in remaining.items() if ids}
    return MultiGraph(g.vertices, kept, g.tag_map, g.next_id)


def connected_components(
    g: MultiGraph,
    removed_vertices: Iterable[int] = (),
    removed_pairs: Iterable[Pair] = (),
    extra_pairs: Iterable[Pair] = (),
) -> List[FrozenSet[int]]:
    """Components of ``g`` minus the given vertices and pairs, plus optional extra adjacency.

    Components are ordered by their smallest vertex id.
    """
    gone = set(removed_vertices)
    cut = {_pair(*p) for p in removed_pairs}
    extra: Dict[int, List[int]] = {}
    for a, b in extra_pairs:
        extra.setdefault(a, []).append(b)
        extra.setdefault(b, []).append(a)
    seen: Set[int] = set()
    comps: List[FrozenSet[int]] = []
    for start in g.vertices:
        if start in gone or start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        comp = [start]
        while queue:
            v = queue.popleft()
            for w in list(g.neighbors(v)) + extra.get(v, []):
                if w in gone or w in seen:
                    continue
                if cut and _pair(v, w) in cut:
                    continue
                seen.add(w)
                comp.append(w)
                queue.append(w)
        comps.append(frozenset(comp))
    return comps


def is_connected(g: MultiGraph, vs: Optional[Iterable[int]] = None) -> bool:
    """Whether ``g`` (or ``g[vs]``) is connected; the empty graph counts as connected."""
    sub = g if vs is None else g.induced(vs)
    return len(connected_components(sub)) <= 1


def reachable(g: MultiGraph, start: int, removed_ids: Iterable[int] = ()) -> Set[int]:
    """Vertices reachable from ``start`` after deleting edges by id (pairs lose only those copies)."""
    drop = set(removed_ids)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if w in seen:
                continue
            ids = g.pairs[_pair(v, w)]
            if drop and all(i in drop for i in ids):
                continue
            seen.add(w)
            queue.append(w)
    return seen


class EdgeArrays:
    """Array view of a graph for fast repeated contraction by edge masks.

    ``edge_ids`` lists every parallel copy; ``src``/``dst`` hold vertex
    positions (indices into ``vertices``) of each copy.
    """

    def __init__(self, g: MultiGraph) -> None:
        import numpy as np

        self.graph = g
        self.vertices = np.asarray(g.vertices, dtype=np.int64)
        self.position = {v: i for i, v in enumerate(g.vertices)}
        rows = sorted((i, self.position[a], self.position[b]) for (a, b), ids in g.pairs.items() for i in ids)
        self.edge_ids = np.asarray([r[0] for r in rows], dtype=np.int64)
        self.src = np.asarray([r[1] for r in rows], dtype=np.int64)
        self.dst = np.asarray([r[2] for r in rows], dtype=np.int64)

    def labels(self, mask) -> "tuple[int, object]":
        """Component labels of ``(V, edges[mask])`` as ``(count, labels)``."""
        import numpy as np
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        n = len(self.vertices)
        sel = np.flatnonzero(mask)
        mat = coo_matrix(
            (np.ones(len(sel), dtype=np.int8), (self.src[sel], self.dst[sel])), shape=(n, n)
        )
        return connected_components(mat, directed=False)

    def vertex_labels(self, keep) -> "tuple[int, object]":
        """Component labels of the graph restricted to edges with both endpoints in ``keep`` (bool per vertex)."""
        import numpy as np

        mask = np.asarray(keep)[self.src] & np.asarray(keep)[self.dst]
        return self.labels(mask)
