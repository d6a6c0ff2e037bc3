"""Line-based instance files: parsing with line-numbered diagnostics, and printing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

from .graph import MultiGraph, Pair
from .harness import MccInstance, build_graph
from .instances import MwcuInstance, PartialPermutation, SteinerInstance, UlcInstance

PROBLEMS = ("steiner", "emwcu", "nmwcu", "eulc", "nulc", "mcc")

Instance = Union[SteinerInstance, MwcuInstance, UlcInstance, MccInstance]


class InstanceFormatError(ValueError):
    """A malformed instance file; the message starts with the offending line number."""


def problem_of(inst: Instance) -> str:
    if isinstance(inst, SteinerInstance):
        return "steiner"
    if isinstance(inst, MwcuInstance):
        return "emwcu" if inst.edge else "nmwcu"
    if isinstance(inst, UlcInstance):
        return "eulc" if inst.edge else "nulc"
    if isinstance(inst, MccInstance):
        return "mcc"
    raise TypeError(f"not an instance: {type(inst).__name__}")


# -------------------------------------------------------------------- parsing
@dataclass
class _Raw:
    problem: str
    n: int
    m: int
    edges: List[Pair]
    params: Dict[str, int]
    terminals: Dict[int, Optional[int]]
    undeletable: Set[int]
    sigma: Optional[int]
    domains: Dict[int, FrozenSet[int]]
    csts: Dict[Pair, PartialPermutation]


def _fail(line: int, msg: str) -> InstanceFormatError:
    return InstanceFormatError(f"line {line}: {msg}")


def _ints(line: int, words: List[str]) -> List[int]:
    try:
        return [int(w) for w in words]
    except ValueError:
        raise _fail(line, f"expected integers, got {' '.join(words)!r}") from None


def _read(text: str) -> _Raw:
    raw: Optional[_Raw] = None
    e_lines = 0
    for no, line in enumerate(text.splitlines(), start=1):
        words = line.split("#", 1)[0].split()
        if not words:
            continue
        head, rest = words[0], words[1:]
        if raw is None:
            if head != "p" or len(rest) != 3:
                raise _fail(no, "expected header 'p <problem> <n> <m>'")
            if rest[0] not in PROBLEMS:
                raise _fail(no, f"unknown problem {rest[0]!r}")
            n, m = _ints(no, rest[1:])
            if n < 0 or m < 0:
                raise _fail(no, "n and m must be non-negative")
            raw = _Raw(rest[0], n, m, [], {}, {}, set(), None, {}, {})
            continue

        def vertex(word: str) -> int:
            (v,) = _ints(no, [word])
            if not 1 <= v <= raw.n:
                raise _fail(no, f"vertex {v} outside 1..{raw.n}")
            return v

        ulc = raw.problem in ("eulc", "nulc")
        if head == "p":
            raise _fail(no, "duplicate header")
        elif head == "e":
            if len(rest) not in (2, 3):
                raise _fail(no, "expected 'e u v [mult]'")
            u, v = vertex(rest[0]), vertex(rest[1])
            mult = _ints(no, rest[2:])[0] if len(rest) == 3 else 1
            if u == v:
                raise _fail(no, f"loop at vertex {u}")
            if mult < 1:
                raise _fail(no, "multiplicity must be positive")
            raw.edges.extend([(min(u, v), max(u, v))] * mult)
            e_lines += 1
        elif head == "param":
            if len(rest) != 2 or rest[0] not in ("k", "s"):
                raise _fail(no, "expected 'param k <k>' or 'param s <s>'")
            if rest[0] == "s" and raw.problem != "steiner":
                raise _fail(no, "'param s' only applies to steiner")
            if rest[0] in raw.params:
                raise _fail(no, f"duplicate 'param {rest[0]}'")
            (value,) = _ints(no, rest[1:])
            if value < 0:
                raise _fail(no, f"{rest[0]} must be non-negative")
            raw.params[rest[0]] = value
        elif head == "t":
            if raw.problem == "steiner":
                if len(rest) != 1:
                    raise _fail(no, "expected 't v'")
                cls = None
            elif raw.problem in ("emwcu", "nmwcu"):
                if len(rest) != 2:
                    raise _fail(no, "expected 't v <class-id>'")
                (cls,) = _ints(no, rest[1:])
            else:
                raise _fail(no, f"terminals do not apply to {raw.problem}")
            v = vertex(rest[0])
            if v in raw.terminals:
                raise _fail(no, f"duplicate terminal {v}")
            raw.terminals[v] = cls
        elif head == "undeletable":
            if raw.problem != "nmwcu" or len(rest) != 1:
                raise _fail(no, "expected 'undeletable v' in an nmwcu file")
            raw.undeletable.add(vertex(rest[0]))
        elif head == "sigma":
            if not ulc or len(rest) != 1 or raw.sigma is not None:
                raise _fail(no, "expected a single 'sigma <s>' in a ulc file")
            (raw.sigma,) = _ints(no, rest)
            if raw.sigma < 1:
                raise _fail(no, "sigma must be positive")
        elif head == "dom":
            if not ulc or not rest:
                raise _fail(no, "expected 'dom v a1 a2 ...' in a ulc file")
            if raw.sigma is None:
                raise _fail(no, "'dom' before 'sigma'")
            v = vertex(rest[0])
            labels = _ints(no, rest[1:])
            bad = [a for a in labels if not 0 <= a < raw.sigma]
            if bad:
                raise _fail(no, f"labels {bad} outside 0..{raw.sigma - 1}")
            if v in raw.domains:
                raise _fail(no, f"duplicate list for vertex {v}")
            raw.domains[v] = frozenset(labels)
        elif head == "cst":
            if not ulc or len(rest) < 2:
                raise _fail(no, "expected 'cst u v a:b ...' in a ulc file")
            if raw.sigma is None:
                raise _fail(no, "'cst' before 'sigma'")
            u, v = vertex(rest[0]), vertex(rest[1])
            pairs = []
            for word in rest[2:]:
                parts = word.split(":")
                if len(parts) != 2:
                    raise _fail(no, f"expected a pair 'a:b', got {word!r}")
                a, b = _ints(no, parts)
                if not (0 <= a < raw.sigma and 0 <= b < raw.sigma):
                    raise _fail(no, f"pair {word} uses labels outside 0..{raw.sigma - 1}")
                pairs.append((a, b))
            try:
                psi = PartialPermutation(pairs)
            except ValueError as exc:
                raise _fail(no, f"not a partial permutation: {exc}") from None
            key = (min(u, v), max(u, v))
            if key in raw.csts:
                raise _fail(no, f"duplicate constraint for edge ({key[0]}, {key[1]})")
            raw.csts[key] = psi if u < v else psi.inverse()
        else:
            raise _fail(no, f"unknown directive {head!r}")
    if raw is None:
        raise InstanceFormatError("line 1: missing header")
    if e_lines != raw.m:
        raise InstanceFormatError(f"line {no if text else 1}: header announces {raw.m} edge lines, found {e_lines}")
    if "k" not in raw.params:
        raise InstanceFormatError(f"line {no}: missing 'param k'")
    return raw


def parse_instance(text: str) -> Instance:
    raw = _read(text)
    k = raw.params["k"]
    last = len(text.splitlines())
    if raw.problem == "mcc":
        if k < 1 or raw.n % k:
            raise _fail(last, f"{raw.n} vertices cannot form {k} equal parts")
        size = raw.n // k
        try:
            return MccInstance(k, size, frozenset((((u - 1) // size, (u - 1) % size), ((v - 1) // size, (v - 1) % size)) for u, v in raw.edges))
        except ValueError as exc:
            raise _fail(last, str(exc)) from None
    graph = build_graph(raw.n, raw.edges)
    if raw.problem == "steiner":
        if "s" not in raw.params:
            raise _fail(last, "missing 'param s'")
        return SteinerInstance(graph, frozenset(raw.terminals), raw.params["s"], k)
    if raw.problem in ("emwcu", "nmwcu"):
        classes = {v: c for v, c in raw.terminals.items()}
        edge = raw.problem == "emwcu"
        blocked = frozenset() if edge else frozenset(raw.undeletable | set(classes))
        return MwcuInstance(graph, classes, k, blocked, edge=edge)
    if raw.sigma is None:
        raise _fail(last, "missing 'sigma'")
    missing = [p for p in graph.pairs if p not in raw.csts]
    if missing:
        raise _fail(last, f"edge ({missing[0][0]}, {missing[0][1]}) has no 'cst' line")
    stray = [p for p in raw.csts if p not in graph.pairs]
    if stray:
        raise _fail(last, f"constraint on ({stray[0][0]}, {stray[0][1]}) does not match an edge")
    domains = {v: raw.domains.get(v, frozenset(range(raw.sigma))) for v in graph.vertices}
    return UlcInstance(graph, raw.sigma, domains, dict(raw.csts), k, edge=raw.problem == "eulc")


def read_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


# ------------------------------------------------------------------- printing
def is_normalized(g: MultiGraph) -> bool:
    """Vertices are ``1..n`` and edge ids ``1..m``."""
    return g.vertices == tuple(range(1, len(g) + 1)) and g.edge_ids() == list(range(1, g.num_edges + 1))


def normalize(inst: Instance) -> Tuple[Instance, Dict[int, int]]:
    """Renumber vertices to ``1..n`` (in order) and edge ids to ``1..m`` (in id order).

    Returns the renumbered instance and the map from new vertex id to old.
    """
    if isinstance(inst, MccInstance):
        return inst, {}
    g = inst.graph
    new = {v: i + 1 for i, v in enumerate(g.vertices)}
    index = g.edge_index()
    graph = build_graph(len(g), [(new[index[e][0]], new[index[e][1]]) for e in g.edge_ids()])
    back = {i: v for v, i in new.items()}
    if isinstance(inst, SteinerInstance):
        out: Instance = SteinerInstance(graph, frozenset(new[t] for t in inst.terminals), inst.s, inst.k)
    elif isinstance(inst, MwcuInstance):
        out = MwcuInstance(
            graph,
            {new[t]: c for t, c in inst.classes.items()},
            inst.k,
            frozenset(new[v] for v in inst.undeletable),
            edge=inst.edge,
        )
    else:
        cons = {}
        for (u, v), psi in inst.constraints.items():
            a, b = new[u], new[v]
            cons[(min(a, b), max(a, b))] = psi if a < b else psi.inverse()
        domains = {new[v]: inst.domain(v) for v in g.vertices}
        out = UlcInstance(graph, inst.sigma, domains, cons, inst.k, edge=inst.edge)
    return out, back


def _edge_lines(g: MultiGraph) -> List[str]:
    index = g.edge_index()
    runs: List[List[int]] = []
    for e in g.edge_ids():
        pair = index[e]
        if runs and runs[-1][0] == pair and runs[-1][2] == e - 1:
            runs[-1][1] += 1
            runs[-1][2] = e
        else:
            runs.append([pair, 1, e])
    out = []
    for (u, v), mult, _ in runs:
        out.append(f"e {u} {v}" + (f" {mult}" if mult > 1 else ""))
    return out


def format_instance(inst: Instance) -> str:
    """Instance file text; ``parse_instance`` inverts it for normalized instances."""
    problem = problem_of(inst)
    if isinstance(inst, MccInstance):
        size = inst.n
        lines = [f"e {a[0] * size + a[1] + 1} {b[0] * size + b[1] + 1}" for a, b in sorted(inst.edges)]
        return "\n".join([f"p mcc {inst.k * size} {len(lines)}", f"param k {inst.k}"] + lines) + "\n"
    g = inst.graph
    if not is_normalized(g):
        raise ValueError("instance must use vertices 1..n and edge ids 1..m; call normalize() first")
    edges = _edge_lines(g)
    lines = [f"p {problem} {len(g)} {len(edges)}", f"param k {inst.k}"]
    if isinstance(inst, SteinerInstance):
        lines.append(f"param s {inst.s}")
        lines += [f"t {t}" for t in sorted(inst.terminals)]
    elif isinstance(inst, MwcuInstance):
        lines += [f"t {t} {c}" for t, c in sorted(inst.classes.items())]
        if not inst.edge:
            lines += [f"undeletable {v}" for v in sorted(set(inst.undeletable) - set(inst.classes))]
    else:
        lines.append(f"sigma {inst.sigma}")
        full = frozenset(range(inst.sigma))
        for v in g.vertices:
            dom = inst.domain(v)
            if dom != full:
                lines.append(" ".join([f"dom {v}"] + [str(a) for a in sorted(dom)]))
    lines += edges
    if isinstance(inst, UlcInstance):
        for (u, v) in sorted(g.pairs):
            lines.append(" ".join([f"cst {u} {v}"] + [f"{a}:{b}" for a, b in inst.constraints[(u, v)]]))
    return "\n".join(lines) + "\n"


def write_instance(inst: Instance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(inst))
