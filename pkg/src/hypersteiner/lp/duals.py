"""Cut duals on set families: feasibility, uncrossing and lifting to vertex sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..core import Instance, InstanceClass, classify
from ..hyper import FullComponent
from ..ring import exact
from .model import GE, LE, LinearProgram, LpInfeasible
from .simplex import solve_exact


class LiftError(RuntimeError):
    pass


def _crosses(a: frozenset, b: frozenset) -> bool:
    return bool(a & b) and not a <= b and not b <= a


@dataclass
class SetFamilyDual:
    """Nonnegative values z_U on sets U that contain a terminal but not the root."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = {frozenset(u): v for u, v in self.values.items() if v}
        for u, v in self.values.items():
            if v < 0:
                raise ValueError(f"negative dual on {sorted(u)}")

    @property
    def objective(self):
        return exact(sum(self.values.values(), Fraction(0)))

    @property
    def support(self) -> list[frozenset]:
        return sorted(self.values, key=lambda u: (len(u), sorted(u)))

    @property
    def laminar(self) -> bool:
        return self.crossing_pair() is None

    def crossing_pair(self):
        sup = self.support
        for i, a in enumerate(sup):
            for b in sup[i + 1:]:
                if _crosses(a, b):
                    return a, b
        return None

    def validate(self, terminals, root) -> None:
        tset = set(terminals)
        for u in self.values:
            if root in u or not (u & tset):
                raise ValueError(f"set {sorted(u)} is not valid")

    def projection(self, terminals) -> dict:
        """Total value per terminal trace U & R."""
        tset = frozenset(terminals)
        out: dict = {}
        for u, v in self.values.items():
            s = u & tset
            out[s] = out.get(s, 0) + v
        return out


def hyper_dual_violations(z: SetFamilyDual, components: Sequence[FullComponent], cost=None) -> list:
    """Directed-hypergraph dual rows (K, head) whose load exceeds C_K."""
    bad = []
    for fc in components:
        k = set(fc.terminals)
        c = fc.cost_under(cost)
        for head in fc.terminals:
            load = sum((v for u, v in z.values.items() if head not in u and not k.isdisjoint(u)), Fraction(0))
            if load > c:
                bad.append((fc.terminals, head, load, c))
    return bad


def bidirected_dual_violations(z: SetFamilyDual, inst: Instance) -> list:
    """Arcs (a, b) whose load, the sum of z_U over U holding a but not b, exceeds their cost."""
    bad = []
    for (a, b), c in inst.costs.items():
        for s, t in ((a, b), (b, a)):
            load = sum((v for u, v in z.values.items() if s in u and t not in u), Fraction(0))
            if load > c:
                bad.append(((s, t), load, c))
    return bad


def dual_from_solution(sol) -> SetFamilyDual:
    """Row duals of a cut LP whose row descriptors are vertex sets."""
    return SetFamilyDual({u: v for u, v in sol.dual.items()})


def laminarize_dual(z: SetFamilyDual, components: Sequence[FullComponent] | None = None,
                    max_steps: int = 100000) -> SetFamilyDual:
    """Uncross the support into a laminar family.

    For crossing U, U' the smaller of z_U, z_U' moves to U | U' and U & U'.
    Cut loads of every hyperedge do not increase, the objective is unchanged,
    and sum z_U |U|^2 strictly grows, so the loop ends.  If ``components`` is
    given, feasibility is asserted before and after.
    """
    if components is not None and hyper_dual_violations(z, components):
        raise ValueError("input dual is infeasible")
    vals = dict(z.values)
    out = SetFamilyDual(vals)
    for _ in range(max_steps):
        pair = out.crossing_pair()
        if pair is None:
            break
        a, b = pair
        d = min(vals[a], vals[b])
        for u, sgn in ((a, -1), (b, -1), (a | b, 1), (a & b, 1)):
            vals[u] = vals.get(u, 0) + sgn * d
        out = SetFamilyDual(vals)
        vals = dict(out.values)
    else:
        raise RuntimeError("uncrossing did not terminate")
    if out.objective != z.objective:
        raise AssertionError("uncrossing changed the dual objective")
    if components is not None and hyper_dual_violations(out, components):
        raise AssertionError("uncrossing broke dual feasibility")
    return out


def _lift_system(v: int, family: list[frozenset], z: Mapping, inst: Instance) -> LinearProgram:
    """Feasibility system for moving x_U of z_U from U to U + v."""
    lp = LinearProgram(f"lift@{v}")
    for j, _ in enumerate(family):
        lp.add_column(j, Fraction(0))
    for j, u in enumerate(family):
        lp.add_row(("cap", j), {j: Fraction(1)}, LE, z[u])
    for w, c in sorted(inst.neighbors(v).items()):
        inside = [j for j, u in enumerate(family) if w in u]
        outside = [j for j, u in enumerate(family) if w not in u]
        # remaining load on arc w -> v
        need = sum((z[family[j]] for j in inside), Fraction(0)) - c
        lp.add_row(("in", w), {j: Fraction(1) for j in inside}, GE, need)
        # new load on arc v -> w
        lp.add_row(("out", w), {j: Fraction(1) for j in outside}, LE, c)
    return lp


@dataclass
class LiftReport:
    dual: SetFamilyDual
    order: list[int]
    moved: dict = field(default_factory=dict)  # Steiner vertex -> {U: x_U}


def lift_dual(z: SetFamilyDual, inst: Instance) -> LiftReport:
    """Lift a laminar terminal-set dual to a bidirected cut dual, one Steiner vertex at a time.

    ``inst`` is the quasibipartite graph before metric closure.  Each step
    solves the lifting system exactly; failure raises :class:`LiftError`.
    """
    if classify(inst) is InstanceClass.GENERAL:
        raise ValueError("lifting needs a quasibipartite instance")
    if not z.laminar:
        raise ValueError("lifting needs a laminar dual")
    cur = dict(z.values)
    order = sorted(inst.steiner)
    moved = {}
    for v in order:
        nbrs = set(inst.neighbors(v))
        family = sorted((u for u, val in cur.items() if val and u & nbrs), key=lambda u: (len(u), sorted(u)))
        if not family:
            moved[v] = {}
            continue
        try:
            sol = solve_exact(_lift_system(v, family, cur, inst))
        except LpInfeasible as exc:
            raise LiftError(f"lifting system at Steiner vertex {v} is infeasible") from exc
        step = {}
        for j, u in enumerate(family):
            x = sol.x[j]
            if x:
                cur[u] = cur[u] - x
                up = u | {v}
                cur[up] = cur.get(up, 0) + x
                step[u] = x
        moved[v] = step
        cur = {u: val for u, val in cur.items() if val}
    lifted = SetFamilyDual(cur)
    if lifted.projection(inst.terminals) != z.projection(inst.terminals):
        raise AssertionError("lifting changed the projection onto terminal sets")
    bad = bidirected_dual_violations(lifted, inst)
    if bad:
        raise LiftError(f"lifted dual violates arc rows: {bad[:3]}")
    return LiftReport(lifted, order, moved)
