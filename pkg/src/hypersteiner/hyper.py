"""Full components: minimum witness trees, enumeration, loss, drop and gain."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (CostFunction, Edge, Instance, InstanceError, Tree, UnionFind,
                   contract, ekey, mtst)
from .ring import exact, format_value

DEFAULT_TERMINAL_CAP = 10


@dataclass(frozen=True)
class FullComponent:
    """A terminal set with a minimum-cost witness tree whose leaves are exactly its terminals."""

    terminals: tuple[int, ...]
    witness: tuple[Edge, ...]
    cost: Fraction

    def __post_init__(self):
        if len(self.terminals) < 2:
            raise ValueError("a full component needs at least two terminals")
        verts = {x for e in self.witness for x in e}
        if len(self.witness) != len(verts) - 1:
            raise ValueError(f"witness of {self.terminals} is not a tree")
        uf = UnionFind(verts)
        for u, v in self.witness:
            if not uf.union(u, v):
                raise ValueError(f"witness of {self.terminals} has a cycle")
        deg: dict = {}
        for u, v in self.witness:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        tset = set(self.terminals)
        if not tset <= verts:
            raise ValueError("witness misses a terminal")
        for x, d in deg.items():
            if x in tset and d != 1:
                raise ValueError(f"terminal {x} is not a leaf of the witness")
            if x not in tset and d < 2:
                raise ValueError(f"Steiner vertex {x} is a leaf of the witness")

    @property
    def size(self) -> int:
        return len(self.terminals)

    @property
    def steiner_nodes(self) -> tuple[int, ...]:
        tset = set(self.terminals)
        return tuple(sorted({x for e in self.witness for x in e} - tset))

    def cost_under(self, cost: CostFunction | None):
        if cost is None:
            return self.cost
        total = Fraction(0)
        for e in self.witness:
            total = total + cost[e]
        return exact(total)

    def label(self) -> str:
        return "{" + ",".join(map(str, self.terminals)) + "}"


@dataclass(frozen=True)
class LossSet:
    edges: tuple[Edge, ...]
    cost: Fraction


def _key_add(a, b, extra=None):
    ca, na, ea, va = a
    cb, nb, eb, vb = b
    edges = ea + eb
    verts = va | vb
    cost = ca + cb
    if extra is not None:
        edges = edges + (extra[1],)
        cost += extra[0]
        verts = verts | set(extra[1])
    return (cost, len(edges), tuple(sorted(edges)), frozenset(verts))


def _better(a, b) -> bool:
    return b is None or a[:3] < b[:3]


def _witness_table(inst: Instance, terms: Sequence[int], max_size: int) -> dict[int, tuple]:
    """Subset DP over (Steiner vertex, terminal subset).

    Terminals enter only as pendant leaves attached to Steiner vertices, so
    every tree the table describes has the required leaf structure.  Entries
    are keyed by (cost, number of edges, sorted edge list) which fixes ties.
    """
    steiner = inst.steiner
    k = len(terms)
    full = (1 << k) - 1
    table: dict[int, dict[int, tuple]] = {}
    best: dict[int, tuple] = {}
    empty = (Fraction(0), 0, (), frozenset())
    for mask in range(1, full + 1):
        size = bin(mask).count("1")
        if size > max_size:
            continue
        row: dict[int, tuple] = {}
        if size == 1:
            t = terms[mask.bit_length() - 1]
            for s in steiner:
                if inst.has_edge(t, s):
                    row[s] = _key_add(empty, empty, (inst.cost(t, s), ekey(t, s)))
        else:
            low = mask & -mask
            rest = mask ^ low
            # split at a Steiner vertex into two disjoint subtrees
            sub = (rest - 1) & rest
            while True:
                a = sub | low
                b = mask ^ a
                ra, rb = table.get(a), table.get(b)
                if ra and rb:
                    for s, ka in ra.items():
                        kb = rb.get(s)
                        if kb is None or (ka[3] & kb[3]) != {s}:
                            continue
                        cand = _key_add(ka, kb)
                        if _better(cand, row.get(s)):
                            row[s] = cand
                if sub == 0:
                    break
                sub = (sub - 1) & rest
        # grow along Steiner-Steiner edges until stable
        changed = True
        while changed and row:
            changed = False
            for u, ku in list(row.items()):
                for v, c in inst.neighbors(u).items():
                    if inst.is_terminal(v) or v in ku[3]:
                        continue
                    cand = _key_add(ku, empty, (c, ekey(u, v)))
                    if _better(cand, row.get(v)):
                        row[v] = cand
                        changed = True
        table[mask] = row
        if size >= 2:
            cands = []
            for s, key in row.items():
                # s must be an internal vertex of the tree
                if sum(1 for e in key[2] if s in e) >= 2:
                    cands.append(key)
            if size == 2:
                t1, t2 = (terms[i] for i in range(k) if mask >> i & 1)
                if inst.has_edge(t1, t2):
                    e = ekey(t1, t2)
                    cands.append((inst.cost(t1, t2), 1, (e,), frozenset(e)))
            if cands:
                best[mask] = min(cands, key=lambda x: x[:3])
    return best


def _check_terminals(inst: Instance, terms: Iterable[int]) -> tuple[int, ...]:
    terms = tuple(sorted(set(terms)))
    for t in terms:
        if not inst.is_terminal(t):
            raise InstanceError(f"{t} is not a terminal")
    return terms


def min_full_component(inst: Instance, terms: Iterable[int]) -> FullComponent | None:
    """Cheapest full component on exactly ``terms``; None when none exists."""
    terms = _check_terminals(inst, terms)
    if len(terms) < 2:
        raise ValueError("a full component needs at least two terminals")
    best = _witness_table(inst, terms, len(terms))
    key = best.get((1 << len(terms)) - 1)
    if key is None:
        return None
    return FullComponent(terms, key[2], key[0])


def enumerate_full_components(inst: Instance, max_size: int | None = None,
                              cap: int = DEFAULT_TERMINAL_CAP) -> list[FullComponent]:
    """One cheapest full component per terminal subset of size 2..max_size, colex order."""
    terms = tuple(sorted(inst.terminals))
    if len(terms) > cap:
        raise InstanceError(f"{len(terms)} terminals exceed the component cap of {cap}")
    if max_size is None:
        max_size = len(terms)
    best = _witness_table(inst, terms, max_size)
    out = []
    for mask in sorted(best):
        key = best[mask]
        ks = tuple(terms[i] for i in range(len(terms)) if mask >> i & 1)
        out.append(FullComponent(ks, key[2], key[0]))
    return out


def loss(fc: FullComponent, inst: Instance) -> LossSet:
    """Cheapest witness edges linking every Steiner node of ``fc`` to some terminal."""
    uf = UnionFind({x for e in fc.witness for x in e})
    t0 = fc.terminals[0]
    for t in fc.terminals[1:]:
        uf.union(t0, t)
    chosen = []
    for e in sorted(fc.witness, key=lambda e: (inst.cost(*e), e)):
        if uf.union(*e):
            chosen.append(e)
    total = sum((inst.cost(*e) for e in chosen), Fraction(0))
    return LossSet(tuple(sorted(chosen)), total)


def drop(tree: Tree, fc: FullComponent, inst: Instance, cost: CostFunction | None = None):
    """Decrease of the terminal spanning tree cost when ``fc`` is contracted."""
    after = mtst(contract(inst, fc, cost), cost)
    return exact(tree.cost - after.cost)


def gain(tree: Tree, fc: FullComponent, inst: Instance, cost: CostFunction | None = None):
    return exact(drop(tree, fc, inst, cost) - fc.cost_under(cost))


@dataclass(frozen=True)
class GainlessVerdict:
    gainless: bool
    offender: FullComponent | None
    max_gain: object

    def __bool__(self):
        return self.gainless


def is_gainless(inst: Instance, cost: CostFunction | None,
                components: Sequence[FullComponent]) -> GainlessVerdict:
    tree = mtst(inst, cost)
    worst, worst_gain = None, None
    for fc in components:
        g = gain(tree, fc, inst, cost)
        if worst_gain is None or g > worst_gain:
            worst, worst_gain = fc, g
    if worst_gain is None:
        return GainlessVerdict(True, None, Fraction(0))
    return GainlessVerdict(worst_gain <= 0, worst if worst_gain > 0 else None, worst_gain)


def format_component(fc: FullComponent, inst: Instance) -> str:
    wit = ",".join(f"({u},{v})" for u, v in fc.witness)
    return (f"K={fc.label()} cost={format_value(fc.cost)} witness=[{wit}] "
            f"loss={format_value(loss(fc, inst).cost)}")
