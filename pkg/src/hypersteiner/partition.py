"""Partitions of the terminal set and the lattice operations on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

DEFAULT_PARTITION_CAP = 9


class PartitionCapError(ValueError):
    pass


class Partition:
    """A set partition in canonical form: sorted blocks ordered by minimum."""

    __slots__ = ("blocks", "_index", "_hash")

    def __init__(self, blocks: Iterable[Iterable[int]]):
        canon = []
        index = {}
        for b in blocks:
            blk = tuple(sorted(b))
            if not blk:
                raise ValueError("empty block")
            canon.append(blk)
        canon.sort()
        for i, blk in enumerate(canon):
            for x in blk:
                if x in index:
                    raise ValueError(f"element {x} appears in two blocks")
                index[x] = i
        self.blocks: tuple[tuple[int, ...], ...] = tuple(canon)
        self._index = index
        self._hash = hash(self.blocks)

    @classmethod
    def singletons(cls, ground: Iterable[int]) -> "Partition":
        return cls([x] for x in ground)

    @classmethod
    def whole(cls, ground: Iterable[int]) -> "Partition":
        return cls([list(ground)])

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Read a literal such as ``{1,2|3|4,5}``."""
        s = text.strip()
        if not (s.startswith("{") and s.endswith("}")):
            raise ValueError(f"bad partition literal {text!r}")
        inner = s[1:-1].strip()
        if not inner:
            raise ValueError("empty partition")
        return cls([int(x) for x in part.split(",")] for part in inner.split("|"))

    @property
    def ground(self) -> frozenset:
        return frozenset(self._index)

    def block_of(self, x: int) -> int:
        return self._index[x]

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.blocks == other.blocks

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Partition"):
        return (len(self.blocks), self.blocks) < (len(other.blocks), other.blocks)

    def __str__(self):
        return "{" + "|".join(",".join(map(str, b)) for b in self.blocks) + "}"

    def __repr__(self):
        return f"Partition({self})"


def rank(p: Partition) -> int:
    return len(p.blocks)


def _same_ground(p: Partition, q: Partition) -> None:
    if p._index.keys() != q._index.keys():
        raise ValueError("partitions are over different ground sets")


def refines(finer: Partition, coarser: Partition) -> bool:
    """True iff every block of ``finer`` lies inside a block of ``coarser``."""
    _same_ground(finer, coarser)
    idx = coarser._index
    return all(len({idx[x] for x in b}) == 1 for b in finer.blocks)


def meet(p: Partition, q: Partition) -> Partition:
    _same_ground(p, q)
    groups: dict = {}
    for x in p._index:
        groups.setdefault((p._index[x], q._index[x]), []).append(x)
    return Partition(groups.values())


def _components(ground, links: Iterable[Iterable[int]]) -> Partition:
    parent = {x: x for x in ground}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for group in links:
        it = iter(group)
        first = find(next(it))
        for y in it:
            ry = find(y)
            if ry != first:
                parent[ry] = first
    out: dict = {}
    for x in ground:
        out.setdefault(find(x), []).append(x)
    return Partition(out.values())


def join(p: Partition, q: Partition) -> Partition:
    _same_ground(p, q)
    return _components(p._index, list(p.blocks) + list(q.blocks))


def merge(p: Partition, subset: Iterable[int]) -> Partition:
    """Merge every block of ``p`` that meets ``subset``."""
    touched = {p._index[x] for x in subset}
    if len(touched) <= 1:
        return p
    merged = [x for i in touched for x in p.blocks[i]]
    return Partition([merged] + [b for i, b in enumerate(p.blocks) if i not in touched])


def rank_contribution(subset: Iterable[int], p: Partition) -> int:
    """Number of blocks of ``p`` met by ``subset``, minus one (0 for the empty set)."""
    idx = p._index
    return max(0, len({idx[x] for x in subset}) - 1)


def set_rank(subset) -> int:
    return max(0, len(subset) - 1)


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_partitions(ground: Iterable[int], cap: int = DEFAULT_PARTITION_CAP) -> Iterator[Partition]:
    """All set partitions of ``ground`` in restricted-growth-string order."""
    elems = sorted(ground)
    n = len(elems)
    if n > cap:
        raise PartitionCapError(
            f"{n} terminals exceed the partition cap of {cap} "
            f"(Bell({n}) = {bell(n)} rows); use fewer terminals")
    if n == 0:
        return
    code = [0] * n

    def rec(i: int, top: int):
        if i == n:
            blocks: list[list[int]] = [[] for _ in range(top + 1)]
            for e, c in zip(elems, code):
                blocks[c].append(e)
            yield Partition(blocks)
            return
        for c in range(top + 2):
            code[i] = c
            yield from rec(i + 1, max(top, c))

    code[0] = 0
    yield from rec(1, 0)


@dataclass(frozen=True)
class UncrossingReport:
    """Both sides of the rank identity and the rank-contribution inequality."""

    rank_lhs: int
    rank_rhs: int
    rc_lhs: int
    rc_rhs: int

    @property
    def rank_residual(self) -> int:
        return self.rank_lhs - self.rank_rhs

    @property
    def rc_slack(self) -> int:
        return self.rc_lhs - self.rc_rhs

    @property
    def holds(self) -> bool:
        return self.rank_residual == 0 and self.rc_slack >= 0


def check_uncrossing(p: Partition, q: Partition, subset: Iterable[int]) -> UncrossingReport:
    """Evaluate the uncrossing identity and inequality for ``(p, q, subset)``.

    Identity:   r(p)(r(q)-1) + (r(p)-1) = (r(p^q)-1) + sum_i (r(m(q, p_i))-1)
    Inequality: r(p) rc(q) + rc(p) >= rc(p^q) + sum_i rc(m(q, p_i))
    """
    subset = list(subset)
    m = meet(p, q)
    merged = [merge(q, blk) for blk in p.blocks]
    rank_lhs = rank(p) * (rank(q) - 1) + (rank(p) - 1)
    rank_rhs = (rank(m) - 1) + sum(rank(x) - 1 for x in merged)
    rc_lhs = rank(p) * rank_contribution(subset, q) + rank_contribution(subset, p)
    rc_rhs = rank_contribution(subset, m) + sum(rank_contribution(subset, x) for x in merged)
    return UncrossingReport(rank_lhs, rank_rhs, rc_lhs, rc_rhs)
