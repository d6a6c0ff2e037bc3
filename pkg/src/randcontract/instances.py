"""Problem instances, partial permutations and definitional validators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .graph import MultiGraph, Pair, connected_components


# --------------------------------------------------------------------- labels
class PartialPermutation:
    """An injective partial map on labels ``0..s-1``, stored as sorted ``(a, b)`` pairs."""

    __slots__ = ("_fwd", "_bwd")

    def __init__(self, pairs: Iterable[Tuple[int, int]] = ()) -> None:
        fwd: Dict[int, int] = {}
        bwd: Dict[int, int] = {}
        for a, b in pairs:
            a, b = int(a), int(b)
            if fwd.get(a, b) != b or bwd.get(b, a) != a:
                raise ValueError(f"pair ({a}, {b}) breaks injectivity")
            fwd[a] = b
            bwd[b] = a
        self._fwd = fwd
        self._bwd = bwd

    @classmethod
    def identity(cls, labels: Iterable[int]) -> "PartialPermutation":
        return cls((a, a) for a in labels)

    def __call__(self, a: int) -> Optional[int]:
        return self._fwd.get(a)

    def preimage(self, b: int) -> Optional[int]:
        return self._bwd.get(b)

    def __contains__(self, pair: object) -> bool:
        a, b = pair  # type: ignore[misc]
        return self._fwd.get(a) == b

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(sorted(self._fwd.items()))

    def __len__(self) -> int:
        return len(self._fwd)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PartialPermutation) and self._fwd == other._fwd

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._fwd.items())))

    def __repr__(self) -> str:
        return "PartialPermutation({" + ", ".join(f"{a}:{b}" for a, b in self) + "})"

    @property
    def domain(self) -> FrozenSet[int]:
        return frozenset(self._fwd)

    @property
    def image(self) -> FrozenSet[int]:
        return frozenset(self._bwd)

    def inverse(self) -> "PartialPermutation":
        return PartialPermutation((b, a) for a, b in self._fwd.items())

    def then(self, other: "PartialPermutation") -> "PartialPermutation":
        """Apply ``self`` first, then ``other`` (the composition ``other . self``)."""
        return PartialPermutation((a, other._fwd[b]) for a, b in self._fwd.items() if b in other._fwd)

    def intersect(self, other: "PartialPermutation") -> "PartialPermutation":
        return PartialPermutation((a, b) for a, b in self._fwd.items() if other._fwd.get(a) == b)

    def is_permutation(self, sigma: int) -> bool:
        return len(self._fwd) == sigma and set(self._fwd) == set(range(sigma))


# ------------------------------------------------------------------ instances
@dataclass(frozen=True)
class SteinerInstance:
    graph: MultiGraph
    terminals: FrozenSet[int]
    s: int
    k: int


@dataclass(frozen=True)
class MwcuInstance:
    """Node (or, with ``edge=True``, edge) Multiway Cut-Uncut.

    ``classes`` maps each terminal to its equivalence class label.  For the node
    version ``undeletable`` always contains the terminals.
    """

    graph: MultiGraph
    classes: Mapping[int, int]
    k: int
    undeletable: FrozenSet[int] = frozenset()
    edge: bool = False

    @property
    def terminals(self) -> FrozenSet[int]:
        return frozenset(self.classes)

    @property
    def blocked(self) -> FrozenSet[int]:
        return self.terminals | self.undeletable


@dataclass(frozen=True)
class UlcInstance:
    """Unique Label Cover on a simple graph.

    ``constraints[(u, v)]`` with ``u < v`` is the partial permutation sending the
    label of ``u`` to the label of ``v`` (the constraint seen from ``u``).
    ``edge`` selects the edge-deletion version.
    """

    graph: MultiGraph
    sigma: int
    domains: Mapping[int, FrozenSet[int]]
    constraints: Mapping[Pair, PartialPermutation]
    k: int
    edge: bool = False

    def psi(self, u: int, v: int) -> PartialPermutation:
        """Constraint on edge ``uv`` seen from ``u``: maps a label of ``u`` to the label of ``v``."""
        if u < v:
            return self.constraints[(u, v)]
        return self.constraints[(v, u)].inverse()

    def domain(self, v: int) -> FrozenSet[int]:
        return self.domains.get(v, frozenset(range(self.sigma)))


# ---------------------------------------------------------------- validation
def steiner_valid(inst: SteinerInstance, cut: Iterable[int]) -> bool:
    x = set(cut)
    if len(x) > inst.k or not x <= set(inst.graph.edge_ids()):
        return False
    return terminal_components(inst.graph.remove_edges(x), inst.terminals) >= inst.s


def terminal_components(g: MultiGraph, terminals: Iterable[int]) -> int:
    t = set(terminals)
    return sum(1 for c in connected_components(g) if c & t)


def mwcu_partition_ok(g: MultiGraph, classes: Mapping[int, int]) -> bool:
    """Terminals share a component exactly when they share a class."""
    comp_of: Dict[int, int] = {}
    for i, c in enumerate(connected_components(g)):
        for v in c:
            comp_of[v] = i
    owner: Dict[int, int] = {}
    seen_class: Dict[int, int] = {}
    for t, cls in classes.items():
        c = comp_of[t]
        if owner.setdefault(c, cls) != cls:
            return False
        if seen_class.setdefault(cls, c) != c:
            return False
    return True


def mwcu_valid(inst: MwcuInstance, cut: Iterable[int]) -> bool:
    x = set(cut)
    if len(x) > inst.k:
        return False
    if inst.edge:
        if not x <= set(inst.graph.edge_ids()):
            return False
        rest = inst.graph.remove_edges(x)
    else:
        if x & inst.blocked or not x <= set(inst.graph.vertices):
            return False
        rest = inst.graph.remove_vertices(x)
    return mwcu_partition_ok(rest, inst.classes)


def ulc_violations(inst: UlcInstance, cut: Iterable[int], labels: Mapping[int, int]) -> List[str]:
    """Every violated condition of a claimed ``(X, labeling)`` pair, as readable messages."""
    x = set(cut)
    out: List[str] = []
    if len(x) > inst.k:
        out.append(f"deletion set has {len(x)} > {inst.k} elements")
    g = inst.graph
    if inst.edge:
        index = g.edge_index()
        unknown = [e for e in x if e not in index]
        if unknown:
            out.append(f"unknown edges {sorted(unknown)}")
        alive_vertices = list(g.vertices)
        removed_pairs = {index[e] for e in x if e in index}
    else:
        unknown = [v for v in x if v not in g]
        if unknown:
            out.append(f"unknown vertices {sorted(unknown)}")
        alive_vertices = [v for v in g.vertices if v not in x]
        removed_pairs = set()
    alive = set(alive_vertices)
    for v in alive_vertices:
        if v not in labels:
            out.append(f"vertex {v} has no label")
        elif labels[v] not in inst.domain(v):
            out.append(f"label {labels[v]} of vertex {v} is outside its list")
    for (u, v) in g.pairs:
        if u not in alive or v not in alive or (u, v) in removed_pairs:
            continue
        if u in labels and v in labels and (labels[u], labels[v]) not in inst.psi(u, v):
            out.append(f"constraint on edge ({u}, {v}) violated")
    return out


def ulc_valid(inst: UlcInstance, cut: Iterable[int], labels: Mapping[int, int]) -> bool:
    return not ulc_violations(inst, cut, labels)
