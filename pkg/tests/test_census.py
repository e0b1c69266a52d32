import itertools
from collections import Counter
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from almostpartite.census import (
    Seed,
    count_bounded_degree,
    enumerate_class,
    mcmc_toggle_chain,
    partition_class_count,
    pld_predicate,
    sample_bounded_degree,
    sample_partitioned,
    sample_uniform_pld,
    sample_uniform_pld_with_partition,
    size_vector_weights,
)
from almostpartite.decomp import decomposition_from_partition
from almostpartite.errors import CapExceeded
from almostpartite.graph import Graph


def brute_bounded(m, d):
    return sum(1 for g in enumerate_class(m) if g.max_degree() <= d)


def test_small_values():
    # matchings on m labelled vertices: 1, 1, 2, 4, 10, 26, 76
    assert [count_bounded_degree(m, 1) for m in range(7)] == [1, 1, 2, 4, 10, 26, 76]
    assert count_bounded_degree(3, 2) == 8
    assert count_bounded_degree(5, 0) == 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_count_matches_enumeration(d):
    for m in range(7):
        assert count_bounded_degree(m, d) == brute_bounded(m, d)
        assert count_bounded_degree(m, d, method="census") == brute_bounded(m, d)


@pytest.mark.parametrize("d", [1, 2])
def test_routes_agree(d):
    for m in range(0, 30, 3):
        assert count_bounded_degree(m, d, "census") == count_bounded_degree(m, d, "components")


def test_caps_and_bad_input():
    with pytest.raises(CapExceeded):
        count_bounded_degree(10**4, 3)
    with pytest.raises(CapExceeded):
        list(enumerate_class(9))
    with pytest.raises(ValueError):
        count_bounded_degree(-1, 1)


def test_partition_class_count_examples():
    assert partition_class_count((2, 2), 0) == 16
    assert partition_class_count((2, 1), 1) == 8
    assert partition_class_count((3, 3), 1) == 2**9 * 4 * 4


def own_degree_ok(g, masks, d):
    return all((g.adj[v] & m).bit_count() <= d for m in masks for v in range(g.n) if (m >> v) & 1)


def test_partition_class_count_matches_fixed_partition_enumeration():
    # product formula vs brute force over every ordered size vector up to 5 vertices
    for total in range(1, 6):
        graphs = list(enumerate_class(total))
        for l in range(1, total + 1):
            for sizes in itertools.product(range(1, total + 1), repeat=l):
                if sum(sizes) != total:
                    continue
                masks, start = [], 0
                for s in sizes:
                    masks.append(((1 << s) - 1) << start)
                    start += s
                for d in (0, 1, 2):
                    ref = sum(1 for g in graphs if own_degree_ok(g, masks, d))
                    assert partition_class_count(sizes, d) == ref


def test_enumerate_examples():
    assert sum(1 for _ in enumerate_class(3, pld_predicate(2, 0))) == 7
    assert sum(1 for _ in enumerate_class(3, lambda g: g.max_degree() <= 1)) == 4
    assert sum(1 for _ in enumerate_class(2)) == 2


def test_seed_streams_are_reproducible():
    a = [sample_bounded_degree(20, 2, Seed(7, (1, 2))) for _ in range(3)]
    b = sample_bounded_degree(20, 2, Seed(7, (1, 2)))
    assert all(g == b for g in a)
    assert sample_bounded_degree(20, 2, Seed(7, (1, 3))) != b or sample_bounded_degree(20, 2, Seed(8, (1, 2))) != b


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 40), st.integers(0, 3), st.integers(0, 2**32))
def test_bounded_sample_respects_degree(m, d, s):
    g = sample_bounded_degree(m, d, s)
    assert g.n == m and g.max_degree() <= d


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 3), st.integers(0, 2), st.integers(0, 2**32))
def test_partitioned_sample_is_valid(n, l, d, s):
    g, pi = sample_partitioned(n, l, d, s)
    assert decomposition_from_partition(g, pi, d)


def test_small_sampler_frequencies():
    freq = Counter(sample_bounded_degree(3, 1, Seed(1, (i,))) for i in range(4000))
    assert len(freq) == 4 and min(freq.values()) > 850
    assert {sample_bounded_degree(6, 0, i) for i in range(5)} == {Graph(6, [])}


def test_weights_sum_to_pair_count():
    # sum of weights = number of (ordered partition, graph) pairs
    for n in range(1, 6):
        total = sum(w.weight for w in size_vector_weights(n, 2, 1))
        brute = sum(
            partition_class_count((sum(1 for a in assign if a == 0), sum(1 for a in assign if a == 1)), 1)
            for assign in itertools.product((0, 1), repeat=n)
        )
        assert total == brute


def test_rejection_sampler_l1_and_membership():
    g, pi, D = sample_uniform_pld_with_partition(10, 1, 2, 3)
    assert D == 1 and g.max_degree() <= 2
    for i in range(20):
        assert pld_predicate(2, 1)(sample_uniform_pld(7, 2, 1, Seed(2, (i,))))


def test_mcmc_start_and_dense_limit():
    assert mcmc_toggle_chain(5, 2, 0, 1) == Graph(5, [])
    n = 6
    edges = [mcmc_toggle_chain(n, n - 1, 400, Seed(3, (i,))).num_edges() for i in range(400)]
    assert abs(sum(edges) / len(edges) - comb(n, 2) / 2) < 0.6
