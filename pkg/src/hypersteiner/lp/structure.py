"""Tight partitions, chain certificates and the shrinking operation.

Solutions are handled as mappings from terminal tuples K to values; missing
keys are zero and singleton keys are cost-free placeholders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from ..partition import Partition, enumerate_partitions, join, meet, rank, rank_contribution, refines


def partition_slack(x: Mapping[tuple, object], p: Partition):
    total = Fraction(0)
    for k, v in x.items():
        if v:
            total = total + v * rank_contribution(k, p)
    return total - (rank(p) - 1)


def is_tight(x: Mapping[tuple, object], p: Partition) -> bool:
    return partition_slack(x, p) == 0


def tight_partitions(x: Mapping[tuple, object], terminals) -> set[Partition]:
    """All partitions whose covering row holds with equality, the single block included."""
    return {p for p in enumerate_partitions(terminals) if is_tight(x, p)}


@dataclass
class ClosureReport:
    pairs_checked: int
    crossing_pairs: int
    violations: list = field(default_factory=list)

    @property
    def closed(self) -> bool:
        return not self.violations


def verify_meet_join_closure(tight: set[Partition], x: Mapping[tuple, object] | None = None) -> ClosureReport:
    """Check that meet and join of every crossing pair of tight partitions is tight.

    Tightness of a meet or join is decided by membership in ``tight`` or, when
    ``x`` is given, by direct evaluation.
    """
    members = sorted(tight)
    checked = crossing = 0
    bad = []

    def ok(p):
        return p in tight if x is None else is_tight(x, p)

    for i, p in enumerate(members):
        for q in members[i + 1:]:
            checked += 1
            if refines(p, q) or refines(q, p):
                continue
            crossing += 1
            for op, r in (("meet", meet(p, q)), ("join", join(p, q))):
                if not ok(r):
                    bad.append((op, p, q, r))
    return ClosureReport(checked, crossing, bad)


def matrix_rank(rows: list[list]) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    m = [[Fraction(v) for v in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rk = 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for i in range(len(m)):
            if i != rk and m[i][c] != 0:
                f = m[i][c] / m[rk][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rk])]
        rk += 1
    return rk


@dataclass
class ChainReport:
    chain: list[Partition]
    support: list[tuple]
    rank: int
    unique: bool
    sparse: bool

    @property
    def ok(self) -> bool:
        return self.unique and self.sparse


def extract_chain_and_verify(x: Mapping[tuple, object], terminals) -> ChainReport:
    """Greedy maximal chain of tight partitions and the uniqueness test.

    Partitions are taken in order of decreasing rank and kept when comparable
    with all kept ones; every skipped partition stays incomparable with the
    final chain, so it is maximal.  The solution is pinned down by the chain
    when the rank-contribution system restricted to the support has full
    column rank.
    """
    terminals = sorted(terminals)
    top = Partition.whole(terminals)
    cands = sorted((p for p in tight_partitions(x, terminals) if p != top),
                   key=lambda p: (-rank(p), p.blocks))
    chain: list[Partition] = []
    for p in cands:
        if all(refines(p, q) or refines(q, p) for q in chain):
            chain.append(p)
    support = sorted(k for k, v in x.items() if v and len(k) >= 2)
    system = [[rank_contribution(k, p) for k in support] for p in chain]
    rk = matrix_rank(system) if support else 0
    return ChainReport(chain, support, rk, rk == len(support), len(support) <= len(terminals) - 1)


class ShrinkError(ValueError):
    pass


def shrink(x: Mapping[tuple, object], k: tuple, k_minus: tuple, delta) -> dict:
    """Move ``delta`` units from component ``k`` to its subset ``k_minus``."""
    k = tuple(sorted(k))
    k_minus = tuple(sorted(k_minus))
    xk = x.get(k, 0)
    if not set(k_minus) <= set(k) or len(k_minus) != len(k) - 1:
        raise ShrinkError(f"{k_minus} is not a subset of {k} of size |K|-1")
    if not 0 < delta <= xk:
        raise ShrinkError(f"delta {delta} outside (0, {xk}]")
    out = dict(x)
    out[k] = xk - delta
    if not out[k]:
        del out[k]
    if len(k_minus) >= 2:
        out[k_minus] = out.get(k_minus, 0) + delta
    return out


@dataclass
class ShrinkTrace:
    steps: list = field(default_factory=list)   # (K, K', delta)
    x: dict = field(default_factory=dict)

    def weighted_size(self) -> Fraction:
        return sum((v * (len(k) - 1) for k, v in self.x.items()), Fraction(0))


def shrink_to_bounded(x: Mapping[tuple, object], terminals, max_steps: int = 10000) -> ShrinkTrace:
    """Shrink a feasible covering solution until sum x_K (|K|-1) = |R|-1.

    At each step a pair (K, r) is sought such that no tight partition cuts r
    off from the rest of K; shrinking K to K - r by the largest step that
    keeps every partition row satisfied stays feasible and strictly lowers
    sum x_K |K|.  When no such pair exists the all-singletons row is tight.
    """
    terminals = sorted(terminals)
    parts = [p for p in enumerate_partitions(terminals) if rank(p) >= 2]
    bottom = parts.index(Partition.singletons(terminals))
    rc_cache: dict = {}

    def rc(k):
        if k not in rc_cache:
            rc_cache[k] = [rank_contribution(k, p) for p in parts]
        return rc_cache[k]

    cur = {tuple(sorted(k)): Fraction(v) for k, v in x.items() if v and len(k) >= 2}
    slack = [-(rank(p) - 1) for p in parts]
    for k, v in cur.items():
        for i, a in enumerate(rc(k)):
            if a:
                slack[i] += a * v
    trace = ShrinkTrace()
    for _ in range(max_steps):
        if any(s < 0 for s in slack):
            raise ShrinkError("solution left the covering polyhedron")
        if slack[bottom] == 0:
            trace.x = cur
            return trace
        tight = [i for i, s in enumerate(slack) if s == 0]
        move = None
        for k in sorted(cur):
            rk = rc(k)
            for r in k:
                km = tuple(t for t in k if t != r)
                rkm = rc(km)
                if all(rk[i] == rkm[i] for i in tight):
                    move = (k, km)
                    break
            if move:
                break
        if move is None:
            raise ShrinkError("no shrinkable component although the bottom row is slack")
        k, km = move
        rk, rkm = rc(k), rc(km)
        delta = cur[k]
        for i in range(len(parts)):
            if rk[i] != rkm[i]:
                delta = min(delta, slack[i])
        cur = shrink(cur, k, km, delta)
        for i in range(len(parts)):
            diff = rk[i] - rkm[i]
            if diff:
                slack[i] -= diff * delta
        trace.steps.append((k, km, delta))
    raise ShrinkError(f"no convergence within {max_steps} shrink steps")
