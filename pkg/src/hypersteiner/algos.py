"""Approximation heuristics with partition-dual certificates."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (CostFunction, Instance, InstanceClass, UnionFind, classify, contract, edge_cost,
                   metric_closure, mtst, reduce_terminal_costs)
from .hyper import FullComponent, drop, enumerate_full_components, gain, loss
from .partition import Partition, merge, rank, rank_contribution
from .ring import SQRT2, SQRT3, exact, format_value

RATIO_GREEDY_FACTOR = Fraction(73, 60)
ONE_PASS_FACTOR = 2 * SQRT2 - 1


class CertificateError(AssertionError):
    """An asserted bound or dual certificate failed."""


def _sum(values):
    total = Fraction(0)
    for v in values:
        total = total + v
    return exact(total)


# -- partition duals ------------------------------------------------------

@dataclass
class PartitionDual:
    """Values y on partitions of the current terminals.

    ``rep`` maps original terminals to the current terminal that holds them,
    so rows of components given in original ids can be evaluated.
    """

    values: dict
    rep: dict | None = None

    @property
    def objective(self):
        return _sum((rank(p) - 1) * v for p, v in self.values.items())

    def load(self, terminals) -> object:
        ks = {self.rep[t] for t in terminals} if self.rep else set(terminals)
        return _sum(v * rank_contribution(ks, p) for p, v in self.values.items())

    def violations(self, components: Sequence[FullComponent], cost: CostFunction | None = None,
                   scale=1) -> list:
        """Component rows with scale * load > C_K, as (K, scaled load, C_K)."""
        bad = []
        for fc in components:
            ld = exact(scale * self.load(fc.terminals))
            c = fc.cost_under(cost)
            if ld > c:
                bad.append((fc.terminals, ld, c))
        return bad

    def to_json(self) -> dict:
        return {str(p): format_value(v) for p, v in self.values.items()}


# -- ratio greedy -----------------------------------------------------------

def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def greedy_constant(kmax: int = 64) -> tuple[Fraction, int]:
    """max over 2 <= k <= kmax of (k - 1 + H(k-1)) / k, with the first maximiser."""
    best = None
    for k in range(2, kmax + 1):
        v = (k - 1 + harmonic(k - 1)) / k
        if best is None or v > best[0]:
            best = (v, k)
    return best


@dataclass
class RatioGreedyResult:
    chosen: list[FullComponent]
    ratios: list[Fraction]
    partitions: list[Partition]
    dual: PartitionDual
    cost: Fraction
    scaled_violations: list

    @property
    def certified_lower_bound(self) -> Fraction:
        """(60/73) times the dual objective, a lower bound on the partition LP optimum."""
        return self.dual.objective / RATIO_GREEDY_FACTOR


def ratio_greedy(inst: Instance, components: Sequence[FullComponent] | None = None) -> RatioGreedyResult:
    """Greedy hyper-spanning tree by best cost per merged terminal, with its fitted dual.

    ``inst`` is the uniformly quasibipartite graph before closure.
    """
    if classify(inst) is not InstanceClass.UNIFORM:
        raise ValueError("ratio greedy needs a uniformly quasibipartite instance")
    closed = metric_closure(inst)
    if components is None:
        components = enumerate_full_components(closed)
    terms = sorted(closed.terminals)
    uf = UnionFind(terms)
    classes = len(terms)
    chosen, ratios, parts = [], [], [Partition.singletons(terms)]
    while classes > 1:
        best = None
        for fc in components:
            roots = {uf.find(t) for t in fc.terminals}
            if len(roots) != len(fc.terminals):
                continue
            ratio = fc.cost / (len(fc.terminals) - 1)
            if best is None or ratio < best[0]:
                best = (ratio, fc)
        if best is None:
            raise ValueError("no component can extend the hyperforest")
        ratio, fc = best
        for t in fc.terminals[1:]:
            uf.union(fc.terminals[0], t)
        classes -= len(fc.terminals) - 1
        chosen.append(fc)
        ratios.append(ratio)
        parts.append(merge(parts[-1], fc.terminals))
    y = {}
    prev = Fraction(0)
    for p, theta in zip(parts, ratios):
        if theta - prev:
            y[p] = theta - prev
        prev = theta
    dual = PartitionDual(y)
    cost = _sum(fc.cost for fc in chosen)
    if dual.objective != cost:
        raise CertificateError(f"dual objective {dual.objective} differs from tree cost {cost}")
    bad = dual.violations(components, scale=1 / RATIO_GREEDY_FACTOR)
    if bad:
        raise CertificateError(f"scaled greedy dual infeasible on {bad[:3]}")
    return RatioGreedyResult(chosen, ratios, parts, dual, cost, bad)


# -- Kruskal dual ---------------------------------------------------------------

@dataclass
class KruskalDual:
    dual: PartitionDual
    tree_cost: object
    loads: dict        # K -> sum_pi rc_K^pi y_pi
    violations: list   # (K, load, C_K, excess)

    @property
    def feasible(self) -> bool:
        return not self.violations


def kruskal_dual(inst: Instance, cost: CostFunction | None = None,
                 components: Sequence[FullComponent] | None = None) -> KruskalDual:
    """Dual grown by Kruskal on the terminal subgraph.

    Each partition gets the length of the cost interval during which it was
    the current component structure; zero-length partitions are dropped.
    """
    terms = sorted(inst.terminals)
    edges = sorted(((edge_cost(inst, e, cost), e) for e in inst.costs
                    if inst.is_terminal(e[0]) and inst.is_terminal(e[1])),
                   key=lambda p: (p[0], p[1][0], p[1][1]))
    uf = UnionFind(terms)
    cur = Partition.singletons(terms)
    clock = Fraction(0)
    y: dict = {}
    total = Fraction(0)
    for w, (u, v) in edges:
        if rank(cur) == 1:
            break
        if uf.find(u) == uf.find(v):
            continue
        uf.union(u, v)
        if w - clock:
            y[cur] = exact(y.get(cur, 0) + (w - clock))
        clock = w
        total = total + w
        cur = merge(cur, (u, v))
    if rank(cur) != 1:
        raise ValueError("terminal-induced subgraph is disconnected")
    rep = inst.rep_map() if inst.classes is not None else None
    dual = PartitionDual(y, rep)
    if dual.objective != exact(total):
        raise CertificateError("Kruskal dual objective differs from the spanning tree cost")
    loads, bad = {}, []
    for fc in components or ():
        ld = dual.load(fc.terminals)
        loads[fc.terminals] = ld
        c = fc.cost_under(cost)
        if ld > c:
            bad.append((fc.terminals, ld, c, exact(ld - c)))
    return KruskalDual(dual, exact(total), loads, bad)


# -- one-pass heuristics -----------------------------------------------------

@dataclass
class TraceStep:
    iteration: int
    position: int
    component: tuple
    gain: object
    drop: object
    mtst_before: object
    mtst_after: object
    loss: object = None
    threshold: object = None

    def to_json(self) -> dict:
        out = {"iteration": self.iteration, "position": self.position,
               "component": list(self.component)}
        for k in ("gain", "drop", "mtst_before", "mtst_after", "loss", "threshold"):
            v = getattr(self, k)
            if v is not None:
                out[k] = format_value(v)
        return out


@dataclass
class HeuristicTrace:
    algorithm: str
    order: list[tuple]
    steps: list[TraceStep] = field(default_factory=list)
    skipped: list[tuple] = field(default_factory=list)
    final_terminal_tree: tuple = ()
    final_terminal_cost: object = None
    tree_edges: tuple = ()
    cost: object = None
    bound: object = None
    opt_p: object = None
    gain_history: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = [json.dumps(s.to_json(), sort_keys=True) for s in self.steps]
        summary = {"algorithm": self.algorithm, "final": True,
                   "tree_edges": [list(e) for e in self.tree_edges],
                   "cost": format_value(self.cost),
                   "terminal_tree": [list(e) for e in self.final_terminal_tree],
                   "terminal_tree_cost": format_value(self.final_terminal_cost),
                   "skipped": [list(k) for k in self.skipped]}
        if self.bound is not None:
            summary["bound"] = format_value(self.bound)
            summary["opt_p"] = format_value(self.opt_p)
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"


def scan_order(components: Sequence[FullComponent], order: str = "colex", seed: int | None = None) -> list[int]:
    idx = list(range(len(components)))
    if order == "colex":
        return idx
    if order == "shuffle":
        random.Random(seed).shuffle(idx)
        return idx
    raise ValueError(f"unknown scan order {order!r}")


def _original_edges(inst: Instance, edges) -> set:
    return {inst.origin_of(e) for e in edges}


def _track(trace, inst, tree, comps, cost):
    for fc in comps:
        trace.gain_history.setdefault(fc.terminals, []).append(gain(tree, fc, inst, cost))


def _partition_lp_optimum(closed, components):
    from .lp.builders import build_partition_lp
    from .lp.simplex import solve_exact
    return solve_exact(build_partition_lp(components, closed.terminals)).objective


def one_pass_reduced(closed: Instance, components: Sequence[FullComponent] | None = None,
                     order: str = "colex", seed: int | None = None, opt_p=None,
                     track_gains: bool = False, permutation: Sequence[int] | None = None) -> HeuristicTrace:
    """Single scan contracting every component with positive gain under reduced costs.

    Reduced costs divide terminal-terminal edges by sqrt(2).  The returned
    tree is the final terminal spanning tree plus the contracted witnesses.
    """
    if components is None:
        components = enumerate_full_components(closed)
    perm = list(permutation) if permutation is not None else scan_order(components, order, seed)
    reduced = reduce_terminal_costs(closed, SQRT2)
    g = closed
    tree = mtst(g, reduced)
    trace = HeuristicTrace("one-pass", [components[i].terminals for i in perm])
    if track_gains:
        _track(trace, g, tree, components, reduced)
    start = tree.cost
    contracted = []
    for pos, i in enumerate(perm):
        fc = components[i]
        d = drop(tree, fc, g, reduced)
        gn = exact(d - fc.cost_under(reduced))
        if gn > 0:
            g = contract(g, fc, reduced)
            after = mtst(g, reduced)
            trace.steps.append(TraceStep(len(trace.steps), pos, fc.terminals, gn, d, tree.cost, after.cost))
            if after.cost != exact(tree.cost - d):
                raise CertificateError("drop does not match the recomputed spanning tree")
            tree = after
            contracted.append(fc)
            if track_gains:
                _track(trace, g, tree, components, reduced)
    if _sum(s.drop for s in trace.steps) != exact(start - tree.cost):
        raise CertificateError("drops are not additive along the pass")
    tf = _original_edges(g, tree.edges)
    edges = set(tf)
    for fc in contracted:
        edges.update(fc.witness)
    trace.final_terminal_tree = tuple(sorted(tf))
    trace.final_terminal_cost = _sum(closed.costs[e] for e in tf)
    trace.tree_edges = tuple(sorted(edges))
    trace.cost = _sum(closed.costs[e] for e in edges)
    # lower bound on the partition LP from the final gainless state
    kd = kruskal_dual(g, reduced, components)
    trace.certificates["kruskal_feasible"] = kd.feasible
    trace.certificates["kruskal_value"] = kd.tree_cost
    if not kd.feasible:
        raise CertificateError(f"final reduced-cost tree is not gainless: {kd.violations[:3]}")
    if trace.final_terminal_cost != exact(SQRT2 * kd.tree_cost):
        raise CertificateError("terminal tree cost is not sqrt(2) times its reduced cost")
    if opt_p is None:
        opt_p = _partition_lp_optimum(closed, components)
    trace.opt_p = opt_p
    if kd.tree_cost > opt_p:
        raise CertificateError("Kruskal dual value exceeds the partition LP optimum")
    trace.bound = exact(ONE_PASS_FACTOR * opt_p)
    if trace.cost > trace.bound:
        raise CertificateError(f"one-pass cost {trace.cost} exceeds {format_value(trace.bound)}")
    return trace


def loss_contracting(closed: Instance, alpha=SQRT3, components: Sequence[FullComponent] | None = None,
                     order: str = "colex", seed: int | None = None, opt_p=None,
                     track_gains: bool = False, permutation: Sequence[int] | None = None) -> HeuristicTrace:
    """Single scan contracting loss(K) whenever gain(K) exceeds (alpha - 1) loss(K).

    Components with zero loss are skipped: contracting an empty edge set
    changes nothing.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if components is None:
        components = enumerate_full_components(closed)
    perm = list(permutation) if permutation is not None else scan_order(components, order, seed)
    g = closed
    tree = mtst(g)
    trace = HeuristicTrace("loss-contract", [components[i].terminals for i in perm])
    if track_gains:
        _track(trace, g, tree, components, None)
    added = set()
    for pos, i in enumerate(perm):
        fc = components[i]
        ls = loss(fc, closed)
        if ls.cost > fc.cost / 2:
            raise CertificateError(f"loss of {fc.terminals} exceeds half its cost")
        if ls.cost == 0:
            trace.skipped.append(fc.terminals)
            continue
        d = drop(tree, fc, g)
        gn = exact(d - fc.cost)
        threshold = exact((alpha - 1) * ls.cost)
        if gn > threshold:
            g = contract(g, ls.edges)
            after = mtst(g)
            step = TraceStep(len(trace.steps), pos, fc.terminals, gn, exact(tree.cost - after.cost),
                             tree.cost, after.cost, ls.cost, threshold)
            if step.drop < exact(gn + ls.cost):
                raise CertificateError(f"step {step.iteration}: decrease {step.drop} below gain + loss")
            trace.steps.append(step)
            tree = after
            added.update(ls.edges)
            if track_gains:
                _track(trace, g, tree, components, None)
    tf = _original_edges(g, tree.edges)
    trace.final_terminal_tree = tuple(sorted(tf))
    trace.final_terminal_cost = _sum(closed.costs[e] for e in tf)
    edges = tf | added
    trace.tree_edges = tuple(sorted(edges))
    trace.cost = _sum(closed.costs[e] for e in edges)
    if opt_p is None:
        opt_p = _partition_lp_optimum(closed, components)
    trace.opt_p = opt_p
    half = exact((1 + alpha) / 2 * opt_p)
    trace.certificates["terminal_tree_bound"] = half
    if trace.final_terminal_cost > half:
        raise CertificateError("final terminal tree exceeds (1 + alpha)/2 times the LP optimum")
    trace.bound = exact((alpha * alpha + 3) / (2 * alpha) * opt_p)
    if trace.cost > trace.bound:
        raise CertificateError(f"loss-contracting cost {trace.cost} exceeds {format_value(trace.bound)}")
    return trace
