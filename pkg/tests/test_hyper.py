from fractions import Fraction
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from conftest import star
from hypersteiner.core import InstanceClass, InstanceError, metric_closure, mtst, reduce_terminal_costs
from hypersteiner.hyper import (FullComponent, drop, enumerate_full_components, format_component, gain,
                                is_gainless, loss, min_full_component)
from hypersteiner.oracle import random_instance
from hypersteiner.ring import SQRT2

small_instances = st.builds(
    random_instance,
    seed=st.integers(0, 10 ** 6),
    n_vertices=st.integers(4, 6),
    n_terminals=st.integers(2, 4),
    cls=st.sampled_from([InstanceClass.QUASIBIPARTITE, InstanceClass.UNIFORM]),
) | st.builds(random_instance, seed=st.integers(0, 10 ** 6), n_vertices=st.integers(5, 6),
              n_terminals=st.integers(2, 3), cls=st.just(InstanceClass.GENERAL))


def brute_full_component_cost(closed, k):
    """Cheapest tree whose leaves are exactly ``k`` and whose other nodes are Steiner."""
    steiner = closed.steiner
    best = None
    for m in range(len(steiner) + 1):
        for extra in combinations(steiner, m):
            nodes = list(k) + list(extra)
            pool = [(u, v) for u, v in combinations(sorted(nodes), 2)]
            for edges in combinations(pool, len(nodes) - 1):
                g = nx.Graph(edges)
                if g.number_of_nodes() != len(nodes) or not nx.is_tree(g):
                    continue
                if any((g.degree(x) == 1) != (x in k) for x in nodes):
                    continue
                c = sum(closed.costs[e] for e in edges)
                best = c if best is None else min(best, c)
    return best


def brute_loss_cost(fc, costs):
    """Cheapest witness-edge subset joining every Steiner node to a terminal, no two terminals joined."""
    terms = set(fc.terminals)
    best = None
    edges = list(fc.witness)
    for m in range(len(edges) + 1):
        for sub in combinations(edges, m):
            g = nx.Graph()
            g.add_nodes_from(fc.steiner_nodes)
            g.add_nodes_from(terms)
            g.add_edges_from(sub)
            comps = [set(c) for c in nx.connected_components(g)]
            if all(len(c & terms) == 1 for c in comps):
                c = sum((costs[e] for e in sub), Fraction(0))
                best = c if best is None else min(best, c)
    return best


def drop_oracle(closed, k, cost=None):
    """mtst minus the MST of G[R] with the terminals of k joined at zero cost."""
    def w(e):
        return closed.costs[e] if cost is None else cost[e]
    g = nx.Graph()
    g.add_nodes_from(closed.terminals)
    for u, v in combinations(sorted(closed.terminals), 2):
        g.add_edge(u, v, weight=w((u, v)))
    base = sum((d["weight"] for *_, d in nx.minimum_spanning_edges(g, data=True)), Fraction(0))
    for a, b in zip(k, k[1:]):
        g.add_edge(a, b, weight=Fraction(0))
    after = sum((d["weight"] for *_, d in nx.minimum_spanning_edges(g, data=True)), Fraction(0))
    return base - after


# -- star example -----------------------------------------------------------

def test_star_components(star_closed, star_components):
    assert [fc.terminals for fc in star_components] == [(0, 1), (0, 2), (1, 2), (0, 1, 2)]
    triple = star_components[-1]
    assert triple.cost == 3 and set(triple.witness) == {(0, 3), (1, 3), (2, 3)}
    assert triple.steiner_nodes == (3,)
    # both the edge and the two-spoke path cost 2; the edge has fewer Steiner nodes
    pair = star_components[0]
    assert pair.cost == 2 and pair.witness == ((0, 1),)


def test_star_drop_and_gain(star_closed, star_components):
    triple = star_components[-1]
    tree = mtst(star_closed)
    assert drop(tree, triple, star_closed) == 4
    assert gain(tree, triple, star_closed) == 1
    reduced = reduce_terminal_costs(star_closed, SQRT2)
    rtree = mtst(star_closed, reduced)
    assert drop(rtree, triple, star_closed, reduced) == 2 * SQRT2
    g = gain(rtree, triple, star_closed, reduced)
    assert g == 2 * SQRT2 - 3 and g < 0


def test_star_gainless_verdicts(star_closed, star_components):
    v = is_gainless(star_closed, None, star_components)
    assert not v and v.offender.terminals == (0, 1, 2) and v.max_gain == 1
    assert is_gainless(star_closed, reduce_terminal_costs(star_closed, SQRT2), star_components)


def test_no_steiner_instance_is_gainless():
    inst = metric_closure(random_instance(5, 5, 5))
    assert is_gainless(inst, None, enumerate_full_components(inst))


def test_drop_of_tree_edge_is_its_cost():
    inst = metric_closure(random_instance(11, 5, 5))
    tree = mtst(inst)
    for e in tree.edges:
        fc = min_full_component(inst, e)
        if fc.witness == (e,):
            assert drop(tree, fc, inst) == inst.costs[e]


@pytest.mark.parametrize("spokes, want", [((1, 1, 1), 1), ((1, 2, 3), 1), ((3, 2, 5), 2)])
def test_loss_of_star_witness(spokes, want):
    closed = metric_closure(star(spokes))
    fc = min_full_component(closed, (0, 1, 2))
    ls = loss(fc, closed)
    assert ls.cost == want and len(ls.edges) == 1
    assert ls.cost <= fc.cost / 2


def test_loss_of_edge_component_is_empty(star_closed, star_components):
    ls = loss(star_components[0], star_closed)
    assert ls.cost == 0 and not ls.edges


def test_component_counts():
    assert len(enumerate_full_components(metric_closure(random_instance(1, 6, 3)))) == 4
    inst = metric_closure(random_instance(2, 7, 4, cls="quasibipartite"))
    comps = enumerate_full_components(inst)
    assert len(comps) == 11
    assert len(enumerate_full_components(inst, max_size=2)) == 6


def test_colex_order():
    inst = metric_closure(random_instance(2, 7, 4, cls="quasibipartite"))
    order = [fc.terminals for fc in enumerate_full_components(inst)]
    # colex order on subsets is the order of their bitmasks
    masks = [sum(1 << t for t in k) for k in order]
    assert masks == sorted(masks) and len(order) == 11


def test_min_full_component_rejects_non_terminals(star_closed):
    with pytest.raises(InstanceError):
        min_full_component(star_closed, (0, 3))


def test_witness_structure_is_validated():
    with pytest.raises(ValueError):
        FullComponent((0, 1), ((0, 2), (2, 1), (1, 3)), Fraction(3))   # leaf 3 is Steiner
    with pytest.raises(ValueError):
        FullComponent((0, 1, 2), ((0, 1), (1, 2)), Fraction(2))         # terminal 1 internal


def test_dump_format(star_closed, star_components):
    assert format_component(star_components[-1], star_closed) == \
        "K={0,1,2} cost=3 witness=[(0,3),(1,3),(2,3)] loss=1"


# -- properties against brute force ----------------------------------------

@settings(max_examples=25, deadline=None)
@given(small_instances)
def test_min_full_component_matches_brute_force(inst):
    closed = metric_closure(inst)
    comps = {fc.terminals: fc for fc in enumerate_full_components(closed)}
    for size in range(2, len(closed.terminals) + 1):
        for k in combinations(closed.terminals, size):
            want = brute_full_component_cost(closed, k)
            assert (want is None) == (k not in comps)
            if want is None:
                continue
            fc = comps[k]
            assert fc.cost == want
            assert fc.cost == sum(closed.costs[e] for e in fc.witness)


@settings(max_examples=25, deadline=None)
@given(small_instances)
def test_loss_matches_brute_force(inst):
    closed = metric_closure(inst)
    for fc in enumerate_full_components(closed):
        ls = loss(fc, closed)
        assert ls.cost == brute_loss_cost(fc, closed.costs)
        assert ls.cost <= fc.cost / 2
        assert set(ls.edges) <= set(fc.witness)


@settings(max_examples=25, deadline=None)
@given(small_instances)
def test_drop_matches_zero_edge_oracle(inst):
    closed = metric_closure(inst)
    tree = mtst(closed)
    reduced = reduce_terminal_costs(closed, SQRT2)
    rtree = mtst(closed, reduced)
    for fc in enumerate_full_components(closed):
        assert drop(tree, fc, closed) == drop_oracle(closed, fc.terminals)
        assert gain(tree, fc, closed) == drop_oracle(closed, fc.terminals) - fc.cost
        assert drop(rtree, fc, closed, reduced) == drop_oracle(closed, fc.terminals, reduced)
