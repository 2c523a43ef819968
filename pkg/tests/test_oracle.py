from collections import Counter
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from hypersteiner.core import Instance, InstanceClass, classify, metric_closure, mtst
from hypersteiner.hyper import enumerate_full_components
from hypersteiner.lp.builders import build_bounded_partition_lp
from hypersteiner.oracle import (corpus_path, default_corpus, exact_steiner_tree, gap_report, hub_instance,
                                 random_instance, split_full_components)

small = st.builds(
    random_instance,
    seed=st.integers(0, 10 ** 6),
    n_vertices=st.integers(4, 7),
    n_terminals=st.integers(2, 4),
    cls=st.sampled_from([InstanceClass.QUASIBIPARTITE, InstanceClass.UNIFORM]),
) | st.builds(random_instance, seed=st.integers(0, 10 ** 6), n_vertices=st.integers(6, 7),
              n_terminals=st.integers(2, 4), cls=st.just(InstanceClass.GENERAL))


def steiner_subset_oracle(inst):
    """min over Steiner subsets S of the MST of the closure on R + S."""
    closed = metric_closure(inst)
    best = None
    for m in range(len(closed.steiner) + 1):
        for extra in combinations(closed.steiner, m):
            g = nx.Graph()
            nodes = list(closed.terminals) + list(extra)
            for u, v in combinations(nodes, 2):
                g.add_edge(u, v, weight=closed.cost(u, v))
            c = sum((d["weight"] for *_, d in nx.minimum_spanning_edges(g, data=True)), Fraction(0))
            best = c if best is None else min(best, c)
    return best


def subgraph_oracle(inst):
    """Cheapest edge subset of the original graph connecting all terminals."""
    edges = sorted(inst.costs)
    best = None
    for mask in range(1 << len(edges)):
        chosen = [edges[i] for i in range(len(edges)) if mask >> i & 1]
        c = sum((inst.costs[e] for e in chosen), Fraction(0))
        if best is not None and c >= best:
            continue
        g = nx.Graph(chosen)
        g.add_nodes_from(inst.terminals)
        root = inst.terminals[0]
        if all(nx.has_path(g, root, t) for t in inst.terminals):
            best = c
    return best


def test_star_optimum(star_instance):
    tree = exact_steiner_tree(star_instance)
    assert tree.cost == 3 and set(tree.edges) == {(0, 3), (1, 3), (2, 3)}


def test_no_steiner_vertices_gives_mtst():
    inst = random_instance(12, 6, 6)
    assert exact_steiner_tree(inst).cost == mtst(metric_closure(inst)).cost


def test_two_terminals_give_shortest_path():
    inst = random_instance(5, 8, 2, cls="general")
    g = nx.Graph()
    for (u, v), c in inst.costs.items():
        g.add_edge(u, v, weight=c)
    assert exact_steiner_tree(inst).cost == nx.dijkstra_path_length(g, 0, 1)


def test_caps():
    with pytest.raises(ValueError):
        exact_steiner_tree(random_instance(1, 17, 3))
    with pytest.raises(ValueError):
        exact_steiner_tree(random_instance(1, 14, 11, cls="quasibipartite"))


@settings(max_examples=30, deadline=None)
@given(small)
def test_exact_tree_matches_brute_force(inst):
    tree = exact_steiner_tree(inst)
    assert tree.cost == steiner_subset_oracle(inst)
    if len(inst.costs) <= 12:
        assert tree.cost == subgraph_oracle(inst)
    # a tree over closure edges that spans the terminals
    closed = metric_closure(inst)
    g = nx.Graph(tree.edges)
    assert nx.is_tree(g) and set(inst.terminals) <= set(g.nodes)
    assert sum(closed.costs[e] for e in tree.edges) == tree.cost


@settings(max_examples=30, deadline=None)
@given(small)
def test_decomposition_is_feasible_for_bounded_program(inst):
    closed = metric_closure(inst)
    tree = exact_steiner_tree(inst)
    parts = split_full_components(tree, closed)
    terms = set(closed.terminals)
    covered = Counter()
    for ts, edges in parts:
        assert set(ts) <= terms
        for e in edges:
            covered[e] += 1
    assert sum(covered.values()) == len(tree.edges) and max(covered.values()) == 1
    comps = enumerate_full_components(closed)
    lp = build_bounded_partition_lp(comps, closed.terminals)
    assert lp.is_feasible(lp.primal_vector({ts: Fraction(1) for ts, _ in parts if len(ts) >= 2}))


def test_generator_examples():
    a, b = random_instance(7, 8, 4, cls="quasibipartite"), random_instance(7, 8, 4, cls="quasibipartite")
    assert dict(a.costs) == dict(b.costs)
    steiner = set(a.steiner)
    assert not any(u in steiner and v in steiner for u, v in a.costs)
    full = random_instance(7, 5, 5)
    assert not full.steiner and full.is_connected()
    with pytest.raises(ValueError):
        random_instance(1, 5, 4, cls="general")


def test_hub_instances_are_quasibipartite():
    assert classify(hub_instance(3, 9, 5)) is InstanceClass.UNIFORM
    assert classify(hub_instance(3, 9, 5, uniform=False)) is InstanceClass.QUASIBIPARTITE


def test_corpus_is_deterministic_and_mixed():
    a, b = default_corpus(30), default_corpus(30)
    assert a == b
    assert {e.cls for e in a} == set(InstanceClass)
    assert all(e.n_vertices <= 10 and e.n_terminals <= 6 for e in a)
    for e in a[:9]:
        assert classify(e.build()) is e.cls
    assert corpus_path("corpus", "general", 4) == Path("corpus/general/4.stp")
    assert a[0].name == "general/0"


def test_gap_report_on_star(star_instance):
    rep = gap_report(star_instance, "star")
    assert rep.opt_integral == 3 and rep.gap_p == 1 and rep.gap_b == 1
    assert set(rep.optima.values()) == {3}
    js = rep.to_json()
    assert js["gap_P"] == "1" and js["optima"]["B"] == "3"


def test_gap_report_without_steiner_vertices():
    rep = gap_report(random_instance(2, 5, 5), "tree")
    assert rep.gap_p == 1


def test_gap_report_on_fractional_instance():
    # one unit-spoke hub per terminal triple: the LP optimum is fractional
    hubs = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    edges = [(t, 4 + h, 1) for h, trip in enumerate(hubs) for t in trip]
    inst = Instance.build(8, edges, [0, 1, 2, 3])
    rep = gap_report(inst, "hubs")
    assert rep.opt_integral == 5
    assert rep.optima["P"] == Fraction(9, 2) and rep.gap_p == Fraction(10, 9)
    assert rep.gap_b == Fraction(10, 9)
