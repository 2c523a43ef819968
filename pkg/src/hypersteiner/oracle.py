"""Ground truth: exact Steiner trees, seeded random instances and gap reports."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .core import (Instance, InstanceClass, InstanceError, Tree, UnionFind, classify,
                   ekey, metric_closure)

MAX_EXACT_TERMINALS = 10
MAX_EXACT_VERTICES = 16


def exact_steiner_tree(inst: Instance, max_r: int = MAX_EXACT_TERMINALS,
                       max_v: int = MAX_EXACT_VERTICES) -> Tree:
    """Minimum Steiner tree by the Dreyfus-Wagner subset recurrence.

    The returned edges belong to the metric closure of ``inst``.
    """
    if len(inst.terminals) > max_r:
        raise InstanceError(f"{len(inst.terminals)} terminals exceed the exact-solver cap of {max_r}")
    if len(inst.vertices) > max_v:
        raise InstanceError(f"{len(inst.vertices)} vertices exceed the exact-solver cap of {max_v}")
    g = metric_closure(inst)
    vs = g.vertices
    root = g.root
    others = [t for t in g.terminals if t != root]
    k = len(others)
    if k == 0:
        return Tree((), Fraction(0))

    def d(u, v):
        return Fraction(0) if u == v else g.cost(u, v)

    full = (1 << k) - 1
    dp: dict[int, dict] = {}
    back: dict[int, dict] = {}
    for i, t in enumerate(others):
        m = 1 << i
        dp[m] = {v: d(t, v) for v in vs}
        back[m] = {v: ("leaf", t) for v in vs}
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        inner = {}
        low = mask & -mask
        for u in vs:
            best = None
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    val = dp[sub][u] + dp[mask ^ sub][u]
                    if best is None or val < best[0]:
                        best = (val, sub)
                sub = (sub - 1) & mask
            inner[u] = best
        row, brow = {}, {}
        for v in vs:
            best = None
            for u in vs:
                val = inner[u][0] + d(u, v)
                if best is None or val < best[0]:
                    best = (val, u)
            row[v] = best[0]
            brow[v] = ("join", best[1], inner[best[1]][1])
        dp[mask], back[mask] = row, brow

    edges: set = set()
    stack = [(full, root)]
    while stack:
        mask, v = stack.pop()
        kind = back[mask][v]
        if kind[0] == "leaf":
            if kind[1] != v:
                edges.add(ekey(kind[1], v))
            continue
        _, u, sub = kind
        if u != v:
            edges.add(ekey(u, v))
        stack.append((sub, u))
        stack.append((mask ^ sub, u))
    edges = _prune(g, edges)
    total = sum((g.cost(*e) for e in edges), Fraction(0))
    if total != dp[full][root]:
        raise AssertionError("Steiner tree reconstruction does not match its DP value")
    return Tree(tuple(sorted(edges)), total)


def _prune(g: Instance, edges: set) -> set:
    """Drop cycle edges (possible only with zero costs) and Steiner leaves."""
    uf = UnionFind()
    kept = set()
    for e in sorted(edges, key=lambda e: (g.cost(*e), e)):
        uf.add(e[0])
        uf.add(e[1])
        if uf.union(*e):
            kept.add(e)
    changed = True
    while changed:
        changed = False
        deg: dict = {}
        for u, v in kept:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        for e in list(kept):
            for x in e:
                if deg[x] == 1 and not g.is_terminal(x):
                    kept.discard(e)
                    changed = True
                    break
    return kept


def split_full_components(tree: Tree, inst: Instance) -> list[tuple[tuple[int, ...], tuple]]:
    """Split a Steiner tree at its terminals into full components.

    Returns ``(terminals, edges)`` pairs, sorted by terminal tuple.
    """
    uf = UnionFind(range(len(tree.edges)))
    at_steiner: dict = {}
    for i, (u, v) in enumerate(tree.edges):
        for x in (u, v):
            if not inst.is_terminal(x):
                if x in at_steiner:
                    uf.union(at_steiner[x], i)
                else:
                    at_steiner[x] = i
    out = []
    for members in uf.groups().values():
        es = tuple(sorted(tree.edges[i] for i in members))
        ts = tuple(sorted({x for e in es for x in e if inst.is_terminal(x)}))
        out.append((ts, es))
    return sorted(out)


# -- random instances -----------------------------------------------------

def random_instance(seed: int, n_vertices: int, n_terminals: int, cost_range=(1, 20),
                    cls: InstanceClass | str = InstanceClass.GENERAL) -> Instance:
    """Seeded random connected instance of the requested class (pre-closure).

    Terminals are vertices 0..|R|-1, the root is vertex 0, Steiner vertices
    follow.  With |R| = |V| every class yields a plain spanning-tree
    instance.  Quasibipartite classes never join two Steiner vertices; the
    uniform class gives each Steiner vertex one spoke cost.
    """
    cls = InstanceClass(cls)
    if not 1 <= n_terminals <= n_vertices:
        raise ValueError("need 1 <= |R| <= |V|")
    n_steiner = n_vertices - n_terminals
    if n_steiner:
        if cls is InstanceClass.GENERAL and n_steiner < 2:
            raise ValueError("a general instance needs two Steiner vertices")
        if cls is InstanceClass.QUASIBIPARTITE and n_terminals < 2:
            raise ValueError("a quasibipartite instance needs two terminals")
    rng = random.Random(f"{seed}:{n_vertices}:{n_terminals}:{cls.value}")
    lo, hi = cost_range
    terms = list(range(n_terminals))
    steiner = list(range(n_terminals, n_vertices))
    edges: dict = {}

    def cost():
        return rng.randint(lo, hi)

    if cls is InstanceClass.GENERAL:
        order = list(range(n_vertices))
        rng.shuffle(order)
        for i in range(1, n_vertices):
            edges[ekey(order[i], order[rng.randrange(i)])] = cost()
        for u in range(n_vertices):
            for v in range(u + 1, n_vertices):
                both_terminals = v < n_terminals
                if (u, v) not in edges and rng.random() < (0.1 if both_terminals else 0.4):
                    edges[(u, v)] = cost()
        if len(steiner) >= 2 and not any(u >= n_terminals and v >= n_terminals for u, v in edges):
            a, b = rng.sample(steiner, 2)
            edges[ekey(a, b)] = cost()
    else:
        uniform = cls is InstanceClass.UNIFORM
        for s in steiner:
            k = rng.randint(min(2, n_terminals), min(n_terminals, 4))
            spoke = cost()
            for t in rng.sample(terms, k):
                edges[ekey(t, s)] = spoke if uniform else cost()
        uf = UnionFind(range(n_vertices))
        for u, v in edges:
            uf.union(u, v)
        for u in range(n_terminals):
            for v in range(u + 1, n_terminals):
                if rng.random() < 0.1:
                    edges[(u, v)] = cost()
                    uf.union(u, v)
        shuffled = terms[:]
        rng.shuffle(shuffled)
        for a, b in zip(shuffled, shuffled[1:]):
            if uf.union(a, b):
                edges[ekey(a, b)] = cost()
        if not uniform:
            # make sure some Steiner vertex has two distinct spoke costs
            for s in steiner:
                spokes = sorted(e for e in edges if s in e)
                if len(spokes) >= 2:
                    if len({edges[e] for e in spokes}) == 1:
                        e = spokes[0]
                        edges[e] = edges[e] + 1 if edges[e] < hi else edges[e] - 1
                    break
    inst = Instance.build(n_vertices, [(u, v, c) for (u, v), c in sorted(edges.items())], terms)
    if not inst.is_connected():
        raise AssertionError("generator produced a disconnected instance")
    return inst


def corpus_path(root, cls: InstanceClass | str, seed: int) -> Path:
    return Path(root) / InstanceClass(cls).value / f"{seed}.stp"


def hub_instance(seed: int, n_vertices: int, n_terminals: int, cost_range=(1, 20),
                 uniform: bool = True) -> Instance:
    """Quasibipartite instance whose Steiner vertices are hubs on random terminal triples.

    Terminal-terminal edges appear only where needed for connectivity and
    cost at least twice the lower spoke cost.  Such designs have fractional
    LP optima far more often than sparse random graphs.
    """
    if n_terminals < 3 or n_vertices <= n_terminals:
        raise ValueError("hub designs need at least 3 terminals and one Steiner vertex")
    rng = random.Random(f"hub:{seed}:{n_vertices}:{n_terminals}:{uniform}")
    lo, hi = cost_range
    triples = list(combinations(range(n_terminals), 3))
    rng.shuffle(triples)
    edges = {}
    for h, s in enumerate(range(n_terminals, n_vertices)):
        spoke = rng.randint(lo, hi)
        for t in triples[h % len(triples)]:
            edges[(t, s)] = spoke if uniform else min(hi, max(lo, spoke + rng.randint(-1, 1)))
    if not uniform and all(len({c for e, c in edges.items() if e[1] == s}) == 1
                           for s in range(n_terminals, n_vertices)):
        e = min(edges)
        edges[e] = edges[e] + 1 if edges[e] < hi else edges[e] - 1
    uf = UnionFind(range(n_vertices))
    for a, b in edges:
        uf.union(a, b)
    for t in range(1, n_terminals):
        if uf.union(0, t):
            edges[(0, t)] = min(hi, 2 * lo + rng.randint(0, hi - lo))
    return Instance.build(n_vertices, [(u, v, c) for (u, v), c in sorted(edges.items())],
                          range(n_terminals))


@dataclass(frozen=True)
class CorpusEntry:
    cls: InstanceClass
    seed: int
    n_vertices: int
    n_terminals: int
    cost_range: tuple = (1, 20)
    family: str = "random"

    @property
    def name(self) -> str:
        return f"{self.cls.value}/{self.seed}"

    def build(self) -> Instance:
        if self.family == "hub":
            return hub_instance(self.seed, self.n_vertices, self.n_terminals, self.cost_range,
                                self.cls is InstanceClass.UNIFORM)
        return random_instance(self.seed, self.n_vertices, self.n_terminals, self.cost_range, self.cls)


def default_corpus(count: int, seed: int = 0, max_v: int = 10, max_r: int = 6) -> list[CorpusEntry]:
    """Deterministic corpus cycling through general, quasibipartite and uniform classes.

    Every other quasibipartite or uniform entry is a hub design; every other
    random entry draws costs from 5..10 instead of 1..20.
    """
    classes = [InstanceClass.GENERAL, InstanceClass.QUASIBIPARTITE, InstanceClass.UNIFORM]
    rng = random.Random(f"corpus:{seed}:{max_v}:{max_r}")
    out = []
    for i in range(count):
        cls = classes[i % 3]
        r = rng.randint(2, max_r)
        v = rng.randint(min(max_v, r + (2 if cls is InstanceClass.GENERAL else 1)), max_v)
        alt = (i // 3) % 2 == 1
        if alt and cls is not InstanceClass.GENERAL and r >= 4 and v > r:
            out.append(CorpusEntry(cls, seed * 100000 + i, v, r, (5, 6), "hub"))
        else:
            out.append(CorpusEntry(cls, seed * 100000 + i, v, r, (5, 10) if alt else (1, 20)))
    return out


# -- gap reports ----------------------------------------------------------

@dataclass
class GapReport:
    instance: str
    opt_integral: Fraction
    optima: dict
    gap_p: Fraction
    gap_b: Fraction | None
    heuristics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .ring import format_value
        return {
            "instance": self.instance,
            "opt_integral": format_value(self.opt_integral),
            "optima": {k: format_value(v) for k, v in self.optima.items()},
            "gap_P": format_value(self.gap_p),
            "gap_B": None if self.gap_b is None else format_value(self.gap_b),
            "heuristics": {k: {kk: format_value(vv) for kk, vv in v.items()}
                           for k, v in self.heuristics.items()},
        }


def gap_report(inst: Instance, name: str = "instance", max_v: int = 14) -> GapReport:
    """Integral optimum against all five relaxations plus certified heuristic costs."""
    from .algos import CertificateError, loss_contracting, one_pass_reduced, ratio_greedy
    from .hyper import enumerate_full_components
    from .lp.builders import (build_bidirected_lp, build_bounded_partition_lp, build_directed_hyper_lp,
                              build_partition_lp, build_subtour_lp)
    from .lp.simplex import solve_exact
    from .ring import SQRT3

    closed = metric_closure(inst)
    comps = enumerate_full_components(closed)
    terms = closed.terminals
    optima = {
        "P": solve_exact(build_partition_lp(comps, terms)).objective,
        "P2": solve_exact(build_bounded_partition_lp(comps, terms)).objective,
        "S": solve_exact(build_subtour_lp(comps, terms)).objective,
        "D": solve_exact(build_directed_hyper_lp(comps, terms, closed.root)).objective,
    }
    if len(inst.vertices) <= max_v:
        optima["B"] = solve_exact(build_bidirected_lp(inst, cap=max_v)).objective
    opt = exact_steiner_tree(inst).cost
    p = optima["P"]
    gap_p = opt / p if p else Fraction(1)
    if not 1 <= gap_p or gap_p > SQRT3:
        raise CertificateError(f"integrality ratio {gap_p} outside [1, sqrt 3]")
    b = optima.get("B")
    gap_b = (opt / b if b else Fraction(1)) if b is not None else None
    heur = {}
    tr = one_pass_reduced(closed, comps, opt_p=p)
    heur["one-pass"] = {"cost": tr.cost, "bound": tr.bound}
    tr = loss_contracting(closed, SQRT3, comps, opt_p=p)
    heur["loss-contract"] = {"cost": tr.cost, "bound": tr.bound}
    if classify(inst) is InstanceClass.UNIFORM:
        rg = ratio_greedy(inst, comps)
        heur["ratio-greedy"] = {"cost": rg.cost, "bound": Fraction(73, 60) * p}
    return GapReport(name, opt, optima, gap_p, gap_b, heur)
