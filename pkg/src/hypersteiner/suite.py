"""Per-instance invariant suite shared by the CLI and the acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algos import (CertificateError, kruskal_dual, loss_contracting, one_pass_reduced, ratio_greedy)
from .core import Instance, InstanceClass, classify, metric_closure, mtst
from .hyper import drop, enumerate_full_components, is_gainless, loss
from .lp.builders import (DEFAULT_BIDIRECTED_CAP, build_bidirected_lp, build_bounded_partition_lp,
                          build_directed_hyper_lp, build_partition_lp, build_subtour_lp)
from .lp.duals import LiftError, dual_from_solution, hyper_dual_violations, laminarize_dual, lift_dual
from .lp.model import LpError
from .lp.simplex import solve_exact
from .lp.structure import (ShrinkError, extract_chain_and_verify, shrink_to_bounded, tight_partitions,
                           verify_meet_join_closure)
from .oracle import exact_steiner_tree, split_full_components
from .ring import SQRT3, format_value

LP_NAMES = ("P", "P2", "S", "D", "B")


@dataclass
class SuiteOptions:
    lps: tuple = LP_NAMES
    region_samples: int = 2
    scan_orders: int = 5
    root_check: bool = True
    heuristics: bool = True
    oracle: bool = True
    max_v: int = DEFAULT_BIDIRECTED_CAP
    seed: int = 0


@dataclass
class InstanceReport:
    name: str
    cls: str
    n_vertices: int
    n_terminals: int
    optima: dict = field(default_factory=dict)
    support: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        ok = bool(ok)
        self.checks[name] = self.checks.get(name, True) and ok
        if not ok:
            self.failures.append(f"{name}: {detail}" if detail else name)
        return ok

    def to_json(self) -> dict:
        return {
            "instance": self.name,
            "class": self.cls,
            "vertices": self.n_vertices,
            "terminals": self.n_terminals,
            "optima": {k: format_value(v) for k, v in self.optima.items()},
            "support_sizes": self.support,
            "checks": self.checks,
            "failures": self.failures,
            "data": {k: (format_value(v) if isinstance(v, Fraction) or hasattr(v, "sign") else v)
                     for k, v in self.data.items()},
            "notes": self.notes,
            "ok": self.ok,
        }


def _guard(report: InstanceReport, name: str, fn):
    try:
        return fn()
    except (CertificateError, LiftError, LpError, ShrinkError, AssertionError, ValueError) as exc:
        report.check(name, False, f"{type(exc).__name__}: {exc}")
        return None


def _region_samples(report, comps, terms, count, seed):
    """Cross-substitute optima of random objectives over the bounded and subtour LPs."""
    rng = random.Random(f"region:{seed}")
    p2 = build_bounded_partition_lp(comps, terms)
    s = build_subtour_lp(comps, terms)
    for _ in range(count):
        w = [Fraction(rng.randint(0, 12), rng.randint(1, 4)) for _ in comps]
        p2.objective = list(w)
        s.objective = list(w)
        a, b = solve_exact(p2), solve_exact(s)
        ok = s.is_feasible(a.x) and p2.is_feasible(b.x) and a.objective == b.objective
        report.check("region_P2_S", ok, f"objective {[str(v) for v in w]}")


def verify_instance(inst: Instance, name: str = "instance", options: SuiteOptions | None = None) -> InstanceReport:
    """Run every invariant check on ``inst`` (given before metric closure)."""
    opt = options or SuiteOptions()
    cls = classify(inst)
    rep = InstanceReport(name, cls.value, len(inst.vertices), len(inst.terminals))
    closed = metric_closure(inst)
    terms = closed.terminals
    comps = enumerate_full_components(closed)
    sols = {}
    builders = {
        "P": lambda: build_partition_lp(comps, terms),
        "P2": lambda: build_bounded_partition_lp(comps, terms),
        "S": lambda: build_subtour_lp(comps, terms),
        "D": lambda: build_directed_hyper_lp(comps, terms, closed.root),
    }
    for lp_name in opt.lps:
        if lp_name == "B":
            if len(inst.vertices) > opt.max_v:
                rep.notes.append(f"B skipped: {len(inst.vertices)} vertices exceed cap {opt.max_v}")
                continue
            sols["B"] = solve_exact(build_bidirected_lp(inst, cap=opt.max_v))
        else:
            sols[lp_name] = solve_exact(builders[lp_name]())
        rep.optima[lp_name] = sols[lp_name].objective
        rep.support[lp_name] = len(sols[lp_name].support)

    o = rep.optima
    for other in ("P2", "S", "D"):
        if "P" in o and other in o:
            rep.check(f"P={other}", o["P"] == o[other], f"{o['P']} vs {o[other]}")
    if "B" in o and "D" in o:
        rep.check("D>=B", o["D"] >= o["B"], f"{o['D']} < {o['B']}")
        if o["D"] > o["B"]:
            rep.notes.append(f"strict gap between D ({o['D']}) and B ({o['B']})")
            rep.data["strict_D_over_B"] = True
        if cls is not InstanceClass.GENERAL:
            rep.check("D=B", o["D"] == o["B"], f"{o['D']} vs {o['B']}")

    if "D" in sols:
        z = dual_from_solution(sols["D"])
        rep.check("D_dual_feasible", not hyper_dual_violations(z, comps))
        zl = _guard(rep, "laminarize", lambda: laminarize_dual(z, comps))
        if zl is not None:
            rep.check("laminarize", zl.laminar and zl.objective == o["D"])
            if cls is not InstanceClass.GENERAL:
                lifted = _guard(rep, "lift", lambda: lift_dual(zl, inst))
                if lifted is not None:
                    rep.check("lift", lifted.dual.objective == o["D"],
                              f"lifted value {lifted.dual.objective}")
                    rep.data["lift_value"] = lifted.dual.objective

    if "P" in sols:
        x = sols["P"].primal
        rep.check("sparsity", len(x) <= len(terms) - 1, f"support {len(x)}")
        chain = extract_chain_and_verify(x, terms)
        rep.check("chain_unique", chain.unique, f"rank {chain.rank} for support {len(chain.support)}")
        rep.data["chain_length"] = len(chain.chain)
        tight = tight_partitions(x, terms)
        closure = verify_meet_join_closure(tight, x)
        rep.check("tight_closure", closure.closed, str(closure.violations[:2]))
        rep.data["tight_partitions"] = len(tight)
        rep.data["fractional"] = any(v.denominator != 1 for v in x.values())

        cost = {fc.terminals: fc.cost for fc in comps}
        start = {fc.terminals: Fraction(1) for fc in comps}
        tr = _guard(rep, "shrink", lambda: shrink_to_bounded(start, terms))
        if tr is not None:
            before = sum(cost[k] * v for k, v in start.items())
            after = sum(cost[k] * v for k, v in tr.x.items())
            lp2 = build_bounded_partition_lp(comps, terms)
            rep.check("shrink", tr.weighted_size() == len(terms) - 1 and after <= before
                      and lp2.is_feasible(lp2.primal_vector(tr.x)))
            rep.data["shrink_steps"] = len(tr.steps)

        if opt.region_samples and "P2" in opt.lps and "S" in opt.lps:
            _guard(rep, "region_P2_S", lambda: _region_samples(rep, comps, terms, opt.region_samples, opt.seed))

        # Kruskal dual and the gainless theorem
        tree = mtst(closed)
        kd = kruskal_dual(closed, None, comps)
        rows_ok = all(kd.loads[fc.terminals] == drop(tree, fc, closed) for fc in comps)
        rep.check("kruskal_row_identity", rows_ok)
        verdict = is_gainless(closed, None, comps)
        rep.data["gainless"] = verdict.gainless
        rep.check("gainless_iff_dual_feasible", verdict.gainless == kd.feasible)
        if verdict.gainless:
            rep.check("gainless_opt", kd.feasible and o["P"] == tree.cost, f"mtst {tree.cost} vs {o['P']}")
        rep.data["mtst"] = tree.cost
        rep.check("mtst_sandwich", o["P"] <= tree.cost <= 2 * o["P"])

        for fc in comps:
            if loss(fc, closed).cost > fc.cost / 2:
                rep.check("loss_half", False, str(fc.terminals))
        rep.checks.setdefault("loss_half", True)

        if opt.heuristics:
            _heuristics(rep, inst, closed, comps, o["P"], opt)
        if opt.oracle:
            _oracle(rep, inst, closed, comps, o["P"])

    if opt.root_check and "B" in o and len(terms) > 1:
        values = {}
        for r in terms:
            reordered = Instance(inst.vertices, inst.costs, (r,) + tuple(t for t in terms if t != r))
            values[r] = solve_exact(build_bidirected_lp(reordered, cap=opt.max_v)).objective
        same = len(set(values.values())) == 1
        rep.data["B_root_independent"] = same
        if not same:
            rep.notes.append("B optimum depends on the root: "
                             + ", ".join(f"{r}:{v}" for r, v in values.items()))
    return rep


def _heuristics(rep, inst, closed, comps, opt_p, opt):
    orders = [("colex", None)] + [("shuffle", opt.seed * 1000 + i) for i in range(max(0, opt.scan_orders - 1))]
    for order, seed in orders:
        tr = _guard(rep, "one_pass_bound",
                    lambda: one_pass_reduced(closed, comps, order, seed, opt_p=opt_p))
        if tr is not None:
            rep.check("one_pass_bound", tr.cost <= tr.bound)
            if order == "colex":
                rep.data["one_pass_cost"] = tr.cost
                rep.data["one_pass_steps"] = len(tr.steps)
        tr = _guard(rep, "loss_contract_bound",
                    lambda: loss_contracting(closed, SQRT3, comps, order, seed, opt_p=opt_p))
        if tr is not None:
            rep.check("loss_contract_bound", tr.cost <= tr.bound)
            if order == "colex":
                rep.data["loss_contract_cost"] = tr.cost
                rep.data["loss_contract_steps"] = len(tr.steps)
    if InstanceClass(rep.cls) is InstanceClass.UNIFORM:
        res = _guard(rep, "ratio_greedy", lambda: ratio_greedy(inst, comps))
        if res is not None:
            rep.check("ratio_greedy", res.cost * 60 <= 73 * opt_p and not res.scaled_violations,
                      f"cost {res.cost} vs LP {opt_p}")
            rep.data["ratio_greedy_cost"] = res.cost


def _oracle(rep, inst, closed, comps, opt_p):
    tree = exact_steiner_tree(inst)
    rep.data["opt_integral"] = tree.cost
    rep.check("integral_ge_P", tree.cost >= opt_p)
    rep.check("gap_le_sqrt3", tree.cost <= SQRT3 * opt_p)
    parts = split_full_components(tree, closed)
    lp2 = build_bounded_partition_lp(comps, closed.terminals)
    x = lp2.primal_vector({ts: Fraction(1) for ts, _ in parts if len(ts) >= 2})
    rep.check("decomposition_feasible", lp2.is_feasible(x))
    if "B" in rep.optima:
        rep.data["gap_B"] = tree.cost / rep.optima["B"]
    rep.data["gap_P"] = tree.cost / opt_p
