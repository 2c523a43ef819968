import csv
import json

import pytest

from conftest import star
from hypersteiner import cli
from hypersteiner.core import write_instance
from hypersteiner.oracle import random_instance
from hypersteiner.suite import InstanceReport, SuiteOptions, verify_instance


@pytest.fixture
def star_file(tmp_path):
    path = tmp_path / "star.stp"
    write_instance(star(), path)
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_instance_report_on_star(star_instance):
    rep = verify_instance(star_instance, "star")
    assert rep.ok, rep.failures
    assert set(rep.optima) == {"P", "P2", "S", "D", "B"}
    assert set(rep.optima.values()) == {3}
    assert rep.data["opt_integral"] == 3 and rep.data["B_root_independent"]


def test_verify_instance_without_optional_parts():
    rep = verify_instance(random_instance(3, 8, 4, cls="general"), "g",
                          SuiteOptions(heuristics=False, oracle=False, root_check=False, region_samples=0))
    assert rep.ok, rep.failures
    assert "one_pass_bound" not in rep.checks and "B_root_independent" not in rep.data


def test_verify_command_on_star(star_file, capsys):
    code, out, _ = run(["verify", star_file], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["ok"] and set(report["optima"].values()) == {"3"}
    assert len(report["optima"]) == 5


def test_verify_command_on_directory(tmp_path, capsys):
    for seed in range(2):
        write_instance(random_instance(seed, 6, 3, cls="uniformly_quasibipartite"), tmp_path / f"{seed}.stp")
    code, out, _ = run(["verify", tmp_path, "--workers", 2], capsys)
    assert code == 0
    reports = json.loads(out)
    assert [r["instance"].rsplit("/", 1)[-1] for r in reports] == ["0.stp", "1.stp"]


def test_verify_exit_code_on_violation(star_file, capsys, monkeypatch):
    def broken(inst, name, options):
        rep = InstanceReport(name, "general", 0, 0)
        rep.check("P=D", False, "3 vs 4")
        return rep
    monkeypatch.setattr(cli, "verify_instance", broken)
    code, _, err = run(["verify", star_file], capsys)
    assert code == 1 and "P=D: 3 vs 4" in err


def test_solve_command(star_file, tmp_path, capsys):
    out_file = tmp_path / "solve.json"
    code, _, _ = run(["solve", star_file, "--lp", "all", "--out", out_file, "--dump-lp", tmp_path / "lp"], capsys)
    assert code == 0
    report = json.loads(out_file.read_text())
    assert report["optima"] == {k: "3" for k in ("P", "P2", "S", "D", "B")}
    assert report["primal"]["P"] == {"{0,1,2}": "1"}
    assert (tmp_path / "lp" / "star.B.lp").read_text().startswith("\\ model B")


def test_solve_bidirected_cap(tmp_path, capsys):
    path = tmp_path / "big.stp"
    write_instance(random_instance(1, 20, 4), path)
    code, _, err = run(["solve", path, "--lp", "B"], capsys)
    assert code == 2 and "exceed" in err


def test_malformed_file_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.stp"
    path.write_text("steiner 3 1 2\ne 0 1 x\nterminals 0 1\n")
    code, _, err = run(["solve", path], capsys)
    assert code == 2 and "line 2" in err


def test_usage_errors(capsys):
    assert run(["nosuch"], capsys)[0] == 2
    assert run(["solve", "/no/such/file.stp"], capsys)[0] == 2
    assert run(["gen", "--out", "x"], capsys)[0] == 2
    assert run(["heuristic", "x.stp", "--alpha", "1/2"], capsys)[0] == 2


def test_gen_is_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(["gen", "--seed", 7, "--count", 6, "--out", tmp_path / d], capsys)[0] == 0
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.stp"))
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*.stp"))
    assert files_a == files_b and len(files_a) == 6
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    assert {p.parts[0] for p in files_a} == {"general", "quasibipartite", "uniformly_quasibipartite"}


@pytest.mark.parametrize("alg, extra", [("one-pass", []), ("loss-contract", ["--alpha", "sqrt3"]),
                                        ("loss-contract", ["--alpha", "2"]), ("ratio-greedy", []),
                                        ("one-pass", ["--scan-order", "shuffle", "--seed", "3"])])
def test_heuristic_command(star_file, capsys, alg, extra):
    code, out, _ = run(["heuristic", star_file, "--alg", alg, *extra], capsys)
    assert code == 0
    lines = [json.loads(x) for x in out.splitlines()]
    assert lines[-1]["final"] and lines[-1]["algorithm"] == alg


def test_ratio_greedy_command_refuses_general_instance(tmp_path, capsys):
    path = tmp_path / "g.stp"
    write_instance(random_instance(2, 7, 3, cls="general"), path)
    assert run(["heuristic", path, "--alg", "ratio-greedy"], capsys)[0] == 2


def test_gap_command_with_csv(star_file, tmp_path, capsys):
    table = tmp_path / "gap.csv"
    code, out, _ = run(["gap", star_file, "--csv", table], capsys)
    assert code == 0
    assert json.loads(out)[0]["gap_P"] == "1"
    rows = list(csv.DictReader(table.open()))
    assert rows[0]["opt_integral"] == "3" and rows[0]["gap_B"] == "1"


def test_components_command(star_file, capsys):
    code, out, _ = run(["components", star_file], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "K={0,1,2} cost=3 witness=[(0,3),(1,3),(2,3)] loss=1"
