"""Builders for the hypergraphic relaxations and the bidirected cut relaxation.

Column descriptors:
  partition, bounded partition, subtour LPs  ->  terminal tuple K
  directed hypergraph LP                     ->  (K, head)
  bidirected cut LP                          ->  arc (u, v)
Row descriptors:
  partition LPs   ->  Partition (plus the string "bounded" for the equality)
  subtour LP      ->  "rank" for the equality, terminal tuple S otherwise
  directed LPs    ->  frozenset U
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from ..core import CostFunction, Instance
from ..hyper import FullComponent
from ..partition import DEFAULT_PARTITION_CAP, PartitionCapError, enumerate_partitions, rank, rank_contribution, set_rank
from .model import EQ, GE, LE, LinearProgram

DEFAULT_BIDIRECTED_CAP = 14


class CapError(ValueError):
    pass


def _add_component_columns(lp: LinearProgram, components, cost) -> None:
    for fc in components:
        lp.add_column(fc.terminals, fc.cost_under(cost))


def build_partition_lp(components: Sequence[FullComponent], terminals, cost: CostFunction | None = None,
                       cap: int = DEFAULT_PARTITION_CAP, name: str = "P") -> LinearProgram:
    """One covering row per partition of rank >= 2; the single-block row is vacuous."""
    terminals = sorted(terminals)
    if len(terminals) > cap:
        raise PartitionCapError(f"{len(terminals)} terminals exceed the partition cap of {cap}")
    lp = LinearProgram(name)
    _add_component_columns(lp, components, cost)
    for p in enumerate_partitions(terminals, cap):
        if rank(p) < 2:
            continue
        coeffs = {}
        for j, fc in enumerate(components):
            rc = rank_contribution(fc.terminals, p)
            if rc:
                coeffs[j] = Fraction(rc)
        lp.add_row(p, coeffs, GE, Fraction(rank(p) - 1))
    return lp


def build_bounded_partition_lp(components, terminals, cost=None, cap: int = DEFAULT_PARTITION_CAP) -> LinearProgram:
    lp = build_partition_lp(components, terminals, cost, cap, name="P2")
    coeffs = {j: Fraction(len(fc.terminals) - 1) for j, fc in enumerate(components)}
    lp.add_row("bounded", coeffs, EQ, Fraction(len(terminals) - 1))
    return lp


def build_subtour_lp(components, terminals, cost=None, cap: int = DEFAULT_PARTITION_CAP) -> LinearProgram:
    """Rank equality over R plus a packing row per proper subset of size >= 2."""
    terminals = sorted(terminals)
    if len(terminals) > cap:
        raise PartitionCapError(f"{len(terminals)} terminals exceed the subset cap of {cap}")
    lp = LinearProgram("S")
    _add_component_columns(lp, components, cost)
    lp.add_row("rank", {j: Fraction(set_rank(fc.terminals)) for j, fc in enumerate(components)},
               EQ, Fraction(set_rank(terminals)))
    for size in range(2, len(terminals)):
        for sub in combinations(terminals, size):
            s = set(sub)
            coeffs = {}
            for j, fc in enumerate(components):
                k = sum(1 for t in fc.terminals if t in s)
                if k >= 2:
                    coeffs[j] = Fraction(k - 1)
            lp.add_row(sub, coeffs, LE, Fraction(size - 1))
    return lp


def valid_terminal_sets(terminals, root) -> list[frozenset]:
    """Nonempty terminal sets avoiding the root, in bitmask order."""
    others = sorted(t for t in terminals if t != root)
    out = []
    for mask in range(1, 1 << len(others)):
        out.append(frozenset(others[i] for i in range(len(others)) if mask >> i & 1))
    return out


def build_directed_hyper_lp(components, terminals, root, cost=None, cap: int = DEFAULT_PARTITION_CAP) -> LinearProgram:
    """A column per (component, head); a cut row per valid terminal set U.

    (K, i) leaves U when K meets U and the head i lies outside U.
    """
    if len(terminals) > cap:
        raise PartitionCapError(f"{len(terminals)} terminals exceed the cut cap of {cap}")
    lp = LinearProgram("D")
    heads = []
    for fc in components:
        c = fc.cost_under(cost)
        for i in fc.terminals:
            lp.add_column((fc.terminals, i), c)
            heads.append((frozenset(fc.terminals), i))
    one = Fraction(1)
    for u in valid_terminal_sets(terminals, root):
        coeffs = {j: one for j, (k, i) in enumerate(heads) if i not in u and not k.isdisjoint(u)}
        lp.add_row(u, coeffs, GE, one)
    return lp


def build_bidirected_lp(inst: Instance, cap: int = DEFAULT_BIDIRECTED_CAP) -> LinearProgram:
    """Arc pair per edge; a row per vertex set holding a terminal but not the root.

    Each row asks for one unit of arc capacity leaving the set.
    """
    n = len(inst.vertices)
    if n > cap:
        raise CapError(f"{n} vertices exceed the bidirected cap of {cap}")
    lp = LinearProgram("B")
    arcs = []
    for (u, v), c in sorted(inst.costs.items()):
        for a in ((u, v), (v, u)):
            lp.add_column(a, c)
            arcs.append(a)
    verts = [v for v in inst.vertices if v != inst.root]
    pos = {v: i for i, v in enumerate(verts)}
    term_mask = 0
    for t in inst.terminals:
        if t != inst.root:
            term_mask |= 1 << pos[t]
    bit = {v: (1 << pos[v]) if v in pos else 0 for v in inst.vertices}
    one = Fraction(1)
    for mask in range(1, 1 << len(verts)):
        if not mask & term_mask:
            continue
        coeffs = {j: one for j, (a, b) in enumerate(arcs) if mask & bit[a] and not mask & bit[b]}
        u = frozenset(verts[i] for i in range(len(verts)) if mask >> i & 1)
        lp.add_row(u, coeffs, GE, one)
    return lp
