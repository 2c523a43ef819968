"""Command-line entry point.

Exit status: 0 success, 1 an asserted invariant failed, 2 usage or cap error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .algos import CertificateError, loss_contracting, one_pass_reduced, ratio_greedy
from .core import InstanceError, InstanceFormatError, metric_closure, read_instance, write_instance
from .hyper import enumerate_full_components, format_component
from .lp.builders import (CapError, DEFAULT_BIDIRECTED_CAP, build_bidirected_lp, build_bounded_partition_lp,
                          build_directed_hyper_lp, build_partition_lp, build_subtour_lp)
from .lp.export import to_lp_format
from .lp.model import LpError
from .lp.simplex import solve_exact
from .oracle import MAX_EXACT_TERMINALS, MAX_EXACT_VERTICES, default_corpus, gap_report
from .partition import DEFAULT_PARTITION_CAP, PartitionCapError
from .ring import SQRT3, format_value, parse_value
from .suite import LP_NAMES, SuiteOptions, verify_instance

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    paths: list = field(default_factory=list)
    lp: str = "all"
    alg: str = "one-pass"
    alpha: object = SQRT3
    seed: int | None = None
    out: str | None = None
    max_r: int = DEFAULT_PARTITION_CAP
    max_v: int = DEFAULT_BIDIRECTED_CAP
    scan_order: str = "colex"
    count: int = 210
    workers: int = 4
    dump_lp: str | None = None
    csv: str | None = None

    def __post_init__(self):
        if not 2 <= self.max_r <= DEFAULT_PARTITION_CAP:
            raise UsageError(f"--max-r must lie in 2..{DEFAULT_PARTITION_CAP}")
        if not 1 <= self.max_v <= MAX_EXACT_VERTICES:
            raise UsageError(f"--max-v must lie in 1..{MAX_EXACT_VERTICES}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _instance_files(paths) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.rglob("*.stp")))
        elif p.exists():
            files.append(p)
        else:
            raise UsageError(f"no such file or directory: {p}")
    if not files:
        raise UsageError("no instance files given")
    return files


def _load(path: Path, cfg: RunConfig, need_b: bool = False):
    inst = read_instance(path)
    if len(inst.terminals) > cfg.max_r:
        raise CapError(f"{path}: {len(inst.terminals)} terminals exceed --max-r {cfg.max_r}")
    if need_b and len(inst.vertices) > cfg.max_v:
        raise CapError(f"{path}: {len(inst.vertices)} vertices exceed --max-v {cfg.max_v}")
    return inst


def _fan_out(fn, items, workers: int) -> list:
    """Run ``fn`` over ``items`` on a thread pool; results keep input order."""
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(fn, items))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands -------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    names = LP_NAMES if cfg.lp == "all" else (cfg.lp,)
    (path,) = _instance_files(cfg.paths[:1])
    inst = _load(path, cfg, need_b="B" in names)
    closed = metric_closure(inst)
    comps = enumerate_full_components(closed)
    terms = closed.terminals
    builders = {
        "P": lambda: build_partition_lp(comps, terms, cap=cfg.max_r),
        "P2": lambda: build_bounded_partition_lp(comps, terms, cap=cfg.max_r),
        "S": lambda: build_subtour_lp(comps, terms, cap=cfg.max_r),
        "D": lambda: build_directed_hyper_lp(comps, terms, closed.root, cap=cfg.max_r),
        "B": lambda: build_bidirected_lp(inst, cap=cfg.max_v),
    }
    report = {"instance": str(path), "optima": {}, "support_sizes": {}, "primal": {}}
    for name in names:
        lp = builders[name]()
        if cfg.dump_lp:
            Path(cfg.dump_lp).mkdir(parents=True, exist_ok=True)
            (Path(cfg.dump_lp) / f"{path.stem}.{name}.lp").write_text(to_lp_format(lp))
        sol = solve_exact(lp)
        report["optima"][name] = format_value(sol.objective)
        report["support_sizes"][name] = len(sol.support)
        report["primal"][name] = {_label(k, name): format_value(v) for k, v in sol.primal.items()}
    _emit(_dumps(report), cfg.out)
    return EXIT_OK


def _label(col, lp_name: str) -> str:
    if lp_name == "B":
        return f"{col[0]}->{col[1]}"
    if lp_name == "D":
        terms, head = col
        return "{" + ",".join(map(str, terms)) + "}^" + str(head)
    return "{" + ",".join(map(str, col)) + "}"


def cmd_verify(cfg: RunConfig) -> int:
    files = _instance_files(cfg.paths)
    insts = [_load(p, cfg, need_b=True) for p in files]
    opts = SuiteOptions(max_v=cfg.max_v, seed=cfg.seed or 0)
    reports = _fan_out(lambda pair: verify_instance(pair[1], str(pair[0]), opts), list(zip(files, insts)),
                       cfg.workers)
    payload = [r.to_json() for r in reports]
    _emit(_dumps(payload[0] if len(payload) == 1 and not Path(cfg.paths[0]).is_dir() else payload), cfg.out)
    bad = [r for r in reports if not r.ok]
    for r in bad:
        print(f"invariant violation in {r.name}: {r.failures}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_heuristic(cfg: RunConfig) -> int:
    (path,) = _instance_files(cfg.paths[:1])
    inst = _load(path, cfg)
    closed = metric_closure(inst)
    comps = enumerate_full_components(closed)
    if cfg.alg == "ratio-greedy":
        res = ratio_greedy(inst, comps)
        lines = []
        for i, (fc, theta) in enumerate(zip(res.chosen, res.ratios)):
            lines.append(json.dumps({"iteration": i, "component": list(fc.terminals),
                                     "cost": format_value(fc.cost), "ratio": format_value(theta)},
                                    sort_keys=True))
        lines.append(json.dumps({"algorithm": "ratio-greedy", "final": True, "cost": format_value(res.cost),
                                 "dual": res.dual.to_json(),
                                 "dual_objective": format_value(res.dual.objective),
                                 "lp_lower_bound": format_value(res.certified_lower_bound)},
                                sort_keys=True))
        _emit("\n".join(lines) + "\n", cfg.out)
        return EXIT_OK
    if cfg.alg == "one-pass":
        tr = one_pass_reduced(closed, comps, cfg.scan_order, cfg.seed)
    else:
        tr = loss_contracting(closed, cfg.alpha, comps, cfg.scan_order, cfg.seed)
    _emit(tr.to_jsonl(), cfg.out)
    return EXIT_OK


def cmd_gen(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise UsageError("gen needs --seed")
    if not cfg.out:
        raise UsageError("gen needs --out DIR")
    root = Path(cfg.out)
    entries = default_corpus(cfg.count, cfg.seed, max_v=min(cfg.max_v, 10), max_r=min(cfg.max_r, 6))
    for e in entries:
        path = root / e.cls.value / f"{e.seed}.stp"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_instance(e.build(), path,
                       comment=f"{e.family} {e.cls.value} seed={e.seed} costs={e.cost_range[0]}..{e.cost_range[1]}")
    print(f"wrote {len(entries)} instances under {root}", file=sys.stderr)
    return EXIT_OK


def cmd_gap(cfg: RunConfig) -> int:
    files = _instance_files(cfg.paths)
    cap_r = min(cfg.max_r, MAX_EXACT_TERMINALS)
    insts = []
    for p in files:
        inst = _load(p, cfg)
        if len(inst.terminals) > cap_r or len(inst.vertices) > MAX_EXACT_VERTICES:
            raise CapError(f"{p}: exceeds the exact-solver caps")
        insts.append(inst)
    reports = _fan_out(lambda pair: gap_report(pair[1], str(pair[0]), cfg.max_v), list(zip(files, insts)),
                       cfg.workers)
    _emit(_dumps([r.to_json() for r in reports]), cfg.out)
    if cfg.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "opt_integral", "P", "B", "gap_P", "gap_B"])
        for r in reports:
            w.writerow([r.instance, r.opt_integral, r.optima["P"], r.optima.get("B", ""),
                        r.gap_p, "" if r.gap_b is None else r.gap_b])
        Path(cfg.csv).write_text(buf.getvalue())
    return EXIT_OK


def cmd_components(cfg: RunConfig) -> int:
    (path,) = _instance_files(cfg.paths[:1])
    closed = metric_closure(_load(path, cfg))
    lines = [format_component(fc, closed) for fc in enumerate_full_components(closed)]
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "heuristic": cmd_heuristic,
            "gen": cmd_gen, "gap": cmd_gap, "components": cmd_components}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypersteiner",
                                 description="Exact Steiner tree LP relaxations and certified heuristics")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, paths=True):
        if paths:
            p.add_argument("paths", nargs="+", help="instance file(s) or corpus directory")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-r", type=int, default=DEFAULT_PARTITION_CAP, dest="max_r")
        p.add_argument("--max-v", type=int, default=DEFAULT_BIDIRECTED_CAP, dest="max_v")
        p.add_argument("--workers", type=int, default=4)

    p = sub.add_parser("solve", help="solve LP relaxations of one instance")
    common(p)
    p.add_argument("--lp", choices=list(LP_NAMES) + ["all"], default="all")
    p.add_argument("--dump-lp", dest="dump_lp", help="directory for LP text dumps")

    p = sub.add_parser("verify", help="run the invariant suite on instances or a corpus")
    common(p)

    p = sub.add_parser("heuristic", help="run a certified heuristic and write its trace")
    common(p)
    p.add_argument("--alg", choices=["ratio-greedy", "one-pass", "loss-contract"], default="one-pass")
    p.add_argument("--alpha", default="sqrt3", help="threshold parameter, p/q or sqrt3")
    p.add_argument("--scan-order", choices=["colex", "shuffle"], default="colex", dest="scan_order")

    p = sub.add_parser("gen", help="write a seeded random corpus")
    common(p, paths=False)
    p.add_argument("--count", type=int, default=210)

    p = sub.add_parser("gap", help="integrality gap reports")
    common(p)
    p.add_argument("--csv", help="also write a CSV summary table")

    p = sub.add_parser("components", help="list full components of an instance")
    common(p)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        kwargs = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
        if "alpha" in kwargs:
            kwargs["alpha"] = parse_value(kwargs["alpha"])
            if not kwargs["alpha"] > 1:
                raise UsageError("--alpha must exceed 1")
        cfg = RunConfig(**kwargs)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, InstanceFormatError, CapError, PartitionCapError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CertificateError, LpError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
