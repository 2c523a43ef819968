from itertools import chain, combinations

import networkx as nx
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.utilities.iterables import multiset_partitions

from hypersteiner.partition import (Partition, PartitionCapError, bell, check_uncrossing, enumerate_partitions,
                                    join, meet, merge, rank, rank_contribution, refines, set_rank)

GROUND = list(range(1, 7))


@st.composite
def partitions(draw, ground=GROUND):
    labels = draw(st.lists(st.integers(0, len(ground) - 1), min_size=len(ground), max_size=len(ground)))
    blocks: dict = {}
    for x, lab in zip(ground, labels):
        blocks.setdefault(lab, []).append(x)
    return Partition(blocks.values())


subsets = st.sets(st.sampled_from(GROUND))


def meet_oracle(p, q):
    return Partition(b for b in ({x for x in bp if x in set(bq)} for bp in p for bq in q) if b)


def join_oracle(p, q):
    g = nx.Graph()
    g.add_nodes_from(p.ground)
    for blk in chain(p.blocks, q.blocks):
        g.add_edges_from(zip(blk, blk[1:]))
    return Partition(nx.connected_components(g))


# -- examples ---------------------------------------------------------------

def test_rank_examples():
    ground = [1, 2, 3, 4, 5]
    assert rank(Partition.whole(ground)) == 1
    assert rank(Partition.singletons(ground)) == 5
    assert rank(Partition.parse("{1,2|3,4}")) == 2


def test_canonical_form_and_literal():
    p = Partition([[4, 3], [2, 1]])
    assert p == Partition.parse("{1,2|3,4}")
    assert str(p) == "{1,2|3,4}"
    assert p.blocks == ((1, 2), (3, 4))
    with pytest.raises(ValueError):
        Partition([[1, 2], [2, 3]])


def test_refinement_examples():
    ground = [1, 2, 3, 4]
    p = Partition.parse("{1,2|3,4}")
    assert refines(Partition.singletons(ground), p)
    assert refines(p, Partition.whole(ground))
    assert refines(p, p)
    assert not refines(p, Partition.parse("{1,3|2,4}"))


def test_meet_join_merge_examples():
    ground = [1, 2, 3, 4]
    p, q = Partition.parse("{1,2|3,4}"), Partition.parse("{1,3|2,4}")
    bottom, top = Partition.singletons(ground), Partition.whole(ground)
    assert meet(p, q) == bottom
    assert meet(p, bottom) == bottom and meet(p, top) == p
    assert join(p, top) == top and join(p, p) == p
    assert merge(bottom, {1, 2, 3}) == Partition.parse("{1,2,3|4}")
    assert merge(p, {3, 4}) == p


def test_rank_contribution_examples():
    k = (1, 2, 3, 4)
    p, q = Partition.parse("{1,2|3,4}"), Partition.parse("{1,3|2,4}")
    assert rank_contribution(k, p) == 1 and rank_contribution(k, q) == 1
    assert rank_contribution(k, meet(p, q)) == 3
    assert rank_contribution(k, join(p, q)) == 0
    # naive submodularity fails on this triple
    assert rank_contribution(k, p) + rank_contribution(k, q) < \
        rank_contribution(k, meet(p, q)) + rank_contribution(k, join(p, q))
    assert rank_contribution((1, 2), p) == 0
    assert rank_contribution(k, Partition.singletons(k)) == 3


# -- enumeration ------------------------------------------------------------

@pytest.mark.parametrize("n", range(0, 9))
def test_bell_numbers_match_oracle(n):
    assert bell(n) == sympy.bell(n)


@pytest.mark.parametrize("n", range(1, 8))
def test_enumeration_is_complete_and_canonical(n):
    ground = list(range(n))
    got = list(enumerate_partitions(ground))
    assert len(got) == len(set(got)) == bell(n)
    assert set(got) == {Partition(bl) for bl in multiset_partitions(ground)}


def test_enumeration_small_cases_and_order():
    assert list(enumerate_partitions([7])) == [Partition([[7]])]
    three = list(enumerate_partitions([1, 2, 3]))
    assert [str(p) for p in three] == ["{1,2,3}", "{1,2|3}", "{1,3|2}", "{1|2,3}", "{1|2|3}"]
    assert len(list(enumerate_partitions(range(4)))) == 15


def test_enumeration_cap():
    with pytest.raises(PartitionCapError, match="fewer terminals"):
        list(enumerate_partitions(range(10)))
    assert len(list(enumerate_partitions(range(4), cap=4))) == 15


# -- lattice properties -----------------------------------------------------

@settings(max_examples=200)
@given(partitions(), partitions())
def test_meet_and_join_match_oracles(p, q):
    assert meet(p, q) == meet_oracle(p, q)
    assert join(p, q) == join_oracle(p, q)


@settings(max_examples=200)
@given(partitions(), partitions(), partitions())
def test_lattice_laws(p, q, s):
    assert meet(p, q) == meet(q, p) and join(p, q) == join(q, p)
    assert meet(meet(p, q), s) == meet(p, meet(q, s))
    assert join(join(p, q), s) == join(p, join(q, s))
    assert meet(p, p) == p and join(p, p) == p
    assert refines(meet(p, q), p) and refines(p, join(p, q))
    assert meet(p, join(p, q)) == p and join(p, meet(p, q)) == p
    assert rank(join(p, q)) + rank(meet(p, q)) >= rank(p) + rank(q)


@settings(max_examples=200)
@given(partitions(), subsets)
def test_merge_is_finest_coarsening_joining_the_subset(p, s):
    m = merge(p, s)
    assert refines(p, m)
    if s:
        assert len({m.block_of(x) for x in s}) == 1
        # merging the subset into a single block and joining agrees
        assert m == join(p, Partition([sorted(s)] + [[x] for x in GROUND if x not in s]))


def test_rank_identity_exhaustive():
    ground = list(range(6))
    parts = list(enumerate_partitions(ground))
    for size in range(len(ground) + 1):
        for k in combinations(ground, size):
            for p in parts:
                inner = sum(set_rank([x for x in k if x in blk]) for blk in p)
                assert set_rank(k) == rank_contribution(k, p) + inner


# -- uncrossing -------------------------------------------------------------

def test_uncrossing_on_counterexample_triple():
    rep = check_uncrossing(Partition.parse("{1,2|3,4}"), Partition.parse("{1,3|2,4}"), (1, 2, 3, 4))
    assert rep.rank_residual == 0
    assert rep.rc_lhs == 3 and rep.rc_rhs == 3 and rep.rc_slack >= 0


@settings(max_examples=300)
@given(partitions(), partitions(), subsets)
def test_uncrossing_holds_for_random_triples(p, q, s):
    rep = check_uncrossing(p, q, s)
    assert rep.rank_residual == 0
    assert rep.rc_slack >= 0


@settings(max_examples=100)
@given(partitions(), st.data())
def test_uncrossing_tight_for_subset_inside_a_block(p, data):
    blk = data.draw(st.sampled_from(p.blocks))
    rep = check_uncrossing(p, p, blk)
    assert rep.holds and rep.rc_slack == 0
