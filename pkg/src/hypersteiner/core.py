"""Steiner instances, metric closure, terminal spanning trees and contraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .ring import QuadraticNumber, exact

Edge = tuple[int, int]


class InstanceError(ValueError):
    pass


class InstanceFormatError(InstanceError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def ekey(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        """Merge the classes of x and y, keeping the smaller representative."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True

    def groups(self) -> dict:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


@dataclass(frozen=True, eq=False)
class Instance:
    """Undirected graph with exact nonnegative edge costs and a rooted terminal set.

    ``terminals`` keeps the listed order; the first listed terminal is the root.
    Contracted instances remember, per edge, the original edge that realises it
    (``origin``) and, per vertex, the original vertices merged into it
    (``classes``).
    """

    vertices: tuple[int, ...]
    costs: Mapping[Edge, Fraction]
    terminals: tuple[int, ...]
    origin: Mapping[Edge, Edge] | None = None
    classes: Mapping[int, frozenset] | None = None
    _adj: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.terminals:
            raise InstanceError("terminal set is empty")
        vs = set(self.vertices)
        if len(set(self.terminals)) != len(self.terminals):
            raise InstanceError("duplicate terminal")
        for t in self.terminals:
            if t not in vs:
                raise InstanceError(f"terminal {t} is not a vertex")
        adj: dict = {v: {} for v in self.vertices}
        for (u, v), c in self.costs.items():
            if u >= v:
                raise InstanceError(f"edge key {(u, v)} not normalised")
            if u not in vs or v not in vs:
                raise InstanceError(f"edge {(u, v)} has an unknown endpoint")
            if c < 0:
                raise InstanceError(f"edge {(u, v)} has negative cost")
            adj[u][v] = c
            adj[v][u] = c
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_tset", frozenset(self.terminals))

    @classmethod
    def build(cls, n: int, edges: Iterable[tuple[int, int, object]], terminals: Iterable[int]):
        costs: dict[Edge, Fraction] = {}
        for u, v, c in edges:
            if u == v:
                raise InstanceError(f"self-loop at {u}")
            k = ekey(u, v)
            c = Fraction(c)
            costs[k] = min(c, costs[k]) if k in costs else c
        return cls(tuple(range(n)), costs, tuple(terminals))

    @property
    def root(self) -> int:
        return self.terminals[0]

    @property
    def terminal_set(self) -> frozenset:
        return self._tset

    @property
    def steiner(self) -> tuple[int, ...]:
        return tuple(v for v in self.vertices if v not in self._tset)

    def is_terminal(self, v: int) -> bool:
        return v in self._tset

    def neighbors(self, v: int) -> dict:
        return self._adj[v]

    def cost(self, u: int, v: int):
        return self._adj[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def origin_of(self, e: Edge) -> Edge:
        return self.origin[e] if self.origin is not None else e

    def class_of(self, v: int) -> frozenset:
        return self.classes[v] if self.classes is not None else frozenset((v,))

    def rep_map(self) -> dict[int, int]:
        """Original vertex -> current vertex."""
        if self.classes is None:
            return {v: v for v in self.vertices}
        return {o: v for v, cl in self.classes.items() for o in cl}

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def is_complete(self) -> bool:
        n = len(self.vertices)
        return len(self.costs) == n * (n - 1) // 2


@dataclass(frozen=True)
class CostFunction:
    """Edge costs keyed by original edge; ``tag`` is ``"c"`` or a reduced-cost label."""

    values: Mapping[Edge, object]
    tag: str = "c"

    def __getitem__(self, e: Edge):
        return self.values[e]


@dataclass(frozen=True)
class Tree:
    edges: tuple[Edge, ...]
    cost: object

    def vertices(self) -> set[int]:
        return {x for e in self.edges for x in e}


class InstanceClass(str, Enum):
    GENERAL = "general"
    QUASIBIPARTITE = "quasibipartite"
    UNIFORM = "uniformly_quasibipartite"


def edge_cost(inst: Instance, e: Edge, cost: CostFunction | None = None):
    if cost is None:
        return inst.costs[e]
    return cost[inst.origin_of(e)]


def metric_closure(inst: Instance) -> Instance:
    """Complete graph on V with shortest-path costs (Floyd-Warshall, exact)."""
    if not inst.is_connected():
        raise InstanceError("instance not connected")
    vs = inst.vertices
    dist = {u: {v: (Fraction(0) if u == v else None) for v in vs} for u in vs}
    for (u, v), c in inst.costs.items():
        dist[u][v] = dist[v][u] = c
    for k in vs:
        dk = dist[k]
        for i in vs:
            dik = dist[i][k]
            if dik is None:
                continue
            di = dist[i]
            for j, dkj in dk.items():
                if dkj is None:
                    continue
                cand = dik + dkj
                if di[j] is None or cand < di[j]:
                    di[j] = cand
    costs = {}
    for a, u in enumerate(vs):
        for v in vs[a + 1:]:
            costs[ekey(u, v)] = dist[u][v]
    return Instance(vs, costs, inst.terminals, classes=inst.classes)


def classify(inst: Instance) -> InstanceClass:
    """Quasibipartite classification; call on the pre-closure graph."""
    uniform = True
    for (u, v), c in inst.costs.items():
        su, sv = not inst.is_terminal(u), not inst.is_terminal(v)
        if su and sv:
            return InstanceClass.GENERAL
    for s in inst.steiner:
        spoke_costs = set(inst.neighbors(s).values())
        if len(spoke_costs) > 1:
            uniform = False
    return InstanceClass.UNIFORM if uniform else InstanceClass.QUASIBIPARTITE


is_quasibipartite = classify


def mst_edges(nodes: Iterable[int], weighted: Iterable[tuple[object, Edge]],
              uf: UnionFind | None = None) -> list[tuple[object, Edge]]:
    """Kruskal over ``(weight, edge)`` pairs, ties broken by (weight, u, v)."""
    uf = uf or UnionFind(nodes)
    chosen = []
    for w, (u, v) in sorted(weighted, key=lambda p: (p[0], p[1][0], p[1][1])):
        if uf.union(u, v):
            chosen.append((w, (u, v)))
    return chosen


def _total(values) -> object:
    total = Fraction(0)
    for x in values:
        total = total + x
    return exact(total)


def mtst(inst: Instance, cost: CostFunction | None = None) -> Tree:
    """Minimum spanning tree of the terminal-induced subgraph G[R]."""
    terms = inst.terminals
    weighted = [(edge_cost(inst, e, cost), e) for e in inst.costs
                if inst.is_terminal(e[0]) and inst.is_terminal(e[1])]
    chosen = mst_edges(terms, weighted)
    if len(chosen) != len(terms) - 1:
        raise InstanceError("terminal-induced subgraph is disconnected")
    return Tree(tuple(e for _, e in chosen), _total(w for w, _ in chosen))


def tree_cost(inst: Instance, edges: Iterable[Edge], cost: CostFunction | None = None):
    return _total(edge_cost(inst, e, cost) for e in edges)


def _merge(inst: Instance, uf: UnionFind, cost: CostFunction | None) -> Instance:
    classes = {}
    for v in inst.vertices:
        r = uf.find(v)
        classes[r] = classes.get(r, frozenset()) | inst.class_of(v)
    new_terms = []
    for t in inst.terminals:
        r = uf.find(t)
        if r not in new_terms:
            new_terms.append(r)
    best: dict[Edge, tuple] = {}
    for e, c in inst.costs.items():
        a, b = uf.find(e[0]), uf.find(e[1])
        if a == b:
            continue
        k = ekey(a, b)
        o = inst.origin_of(e)
        key = (edge_cost(inst, e, cost), o)
        if k not in best or key < best[k][0]:
            best[k] = (key, c, o)
    costs = {k: v[1] for k, v in best.items()}
    origin = {k: v[2] for k, v in best.items()}
    return Instance(tuple(sorted(classes)), costs, tuple(new_terms), origin, classes)


def contract(inst: Instance, item, cost: CostFunction | None = None) -> Instance:
    """Contract a full component or a set of original edges.

    A full component is contracted as a hyperedge: the vertices currently
    holding its terminals are merged into one terminal, and its Steiner
    vertices stay where they are.  An edge set has each edge's endpoints
    merged; a merged vertex is a terminal iff one of its parts was.  Parallel
    edges keep the cheapest representative under ``cost``.
    """
    rep = inst.rep_map()
    uf = UnionFind(inst.vertices)
    terminals = getattr(item, "terminals", None)
    if terminals is not None:
        reps = [rep[t] for t in terminals]
        for r in reps[1:]:
            uf.union(reps[0], r)
    else:
        for u, v in item:
            uf.union(rep[u], rep[v])
    return _merge(inst, uf, cost)


def reduce_terminal_costs(inst: Instance, divisor) -> CostFunction:
    """Divide the cost of every terminal-terminal edge by ``divisor`` (> 1)."""
    if not divisor > 1:
        raise ValueError("divisor must exceed 1")
    values = {}
    for e, c in inst.costs.items():
        o = inst.origin_of(e)
        if inst.is_terminal(e[0]) and inst.is_terminal(e[1]):
            q = QuadraticNumber.coerce(c) / divisor
            values[o] = exact(q)
        else:
            values[o] = c
    return CostFunction(values, tag=f"c/({divisor})")


def base_costs(inst: Instance) -> CostFunction:
    return CostFunction({inst.origin_of(e): c for e, c in inst.costs.items()}, tag="c")


# -- text format ----------------------------------------------------------

def parse_instance(text: str) -> Instance:
    header = None
    edges = []
    terminals = None
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if header is None:
            if tok[0] != "steiner" or len(tok) != 4:
                raise InstanceFormatError("expected header 'steiner <|V|> <|E|> <|R|>'", lineno)
            try:
                declared = tuple(int(x) for x in tok[1:])
            except ValueError:
                raise InstanceFormatError("header counts must be integers", lineno) from None
            header = lineno
            continue
        if tok[0] == "e":
            if len(tok) != 4:
                raise InstanceFormatError("expected 'e u v cost'", lineno)
            try:
                u, v = int(tok[1]), int(tok[2])
                c = Fraction(tok[3])
            except (ValueError, ZeroDivisionError):
                raise InstanceFormatError(f"malformed edge {line!r}", lineno) from None
            if not (0 <= u < declared[0] and 0 <= v < declared[0]):
                raise InstanceFormatError(f"edge endpoint out of range in {line!r}", lineno)
            if c < 0:
                raise InstanceFormatError("negative edge cost", lineno)
            if u == v:
                raise InstanceFormatError("self-loop", lineno)
            edges.append((u, v, c))
        elif tok[0] == "terminals":
            if terminals is not None:
                raise InstanceFormatError("terminals given twice", lineno)
            try:
                terminals = [int(x) for x in tok[1:]]
            except ValueError:
                raise InstanceFormatError("terminal ids must be integers", lineno) from None
            if any(not 0 <= t < declared[0] for t in terminals):
                raise InstanceFormatError("terminal out of range", lineno)
            tline = lineno
        else:
            raise InstanceFormatError(f"unknown record {tok[0]!r}", lineno)
    if header is None:
        raise InstanceFormatError("missing header")
    if terminals is None:
        raise InstanceFormatError("missing terminals line")
    n, m, r = declared
    if len(edges) != m:
        raise InstanceFormatError(f"header declares {m} edges, found {len(edges)}", header)
    if len(terminals) != r:
        raise InstanceFormatError(f"header declares {r} terminals, found {len(terminals)}", tline)
    try:
        return Instance.build(n, edges, terminals)
    except InstanceError as exc:
        raise InstanceFormatError(str(exc), tline) from None


def format_instance(inst: Instance, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"steiner {len(inst.vertices)} {len(inst.costs)} {len(inst.terminals)}")
    for (u, v) in sorted(inst.costs):
        lines.append(f"e {u} {v} {inst.costs[(u, v)]}")
    lines.append("terminals " + " ".join(str(t) for t in inst.terminals))
    return "\n".join(lines) + "\n"


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(inst: Instance, path, comment: str | None = None) -> None:
    Path(path).write_text(format_instance(inst, comment))
