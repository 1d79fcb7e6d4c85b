import numpy as np
import pytest

from isoreduce import (Branch, BranchSet, NonStochasticError, SingularWeightError,
                       WeightedDigraph, branch_weight, compute_depths,
                       enumerate_branches, extended_reduced_matrix,
                       find_structural_set, random_stochastic_graph,
                       reduced_matrix, reduced_matrix_by_length)
from oracles import all_branches_bruteforce, random_complex_graph

THREE_CYCLE_BRANCHES = [(1, 2), (1, 2, 3), (1, 2, 3, 1), (2, 3), (2, 3, 1), (3, 1)]

# All sub-paths of the directed path 4 -> 3 -> 2 -> 1 (each is a branch).
PATH_BRANCHES = [(2, 1), (3, 2), (3, 2, 1), (4, 3), (4, 3, 2), (4, 3, 2, 1)]


def test_branch_weight_edge_is_plain_weight():
    g = WeightedDigraph.from_edges(3, [(1, 2, 0.3 + 0.4j), (2, 3, 1.0)])
    assert branch_weight(g, Branch((1, 2)), 5.0) == 0.3 + 0.4j
    assert branch_weight(g, Branch((1, 2)), -2.0 + 1j) == 0.3 + 0.4j


def test_branch_weight_three_cycle(three_cycle):
    loop = Branch((1, 2, 3, 1))
    assert branch_weight(three_cycle, loop, 2.0) == pytest.approx(0.25)
    assert branch_weight(three_cycle, loop, 1.0) == pytest.approx(1.0)


def test_branch_weight_errors(three_cycle):
    g = WeightedDigraph.from_edges(2, [(1, 2, 1.0), (2, 1, 1.0), (2, 2, 0.5)])
    with pytest.raises(SingularWeightError):
        branch_weight(g, Branch((1, 2, 1)), 0.5)
    with pytest.raises(ValueError):
        branch_weight(three_cycle, Branch((1, 3)), 1.0)


def test_enumerate_three_cycle(three_cycle):
    ss = compute_depths(three_cycle, [1], 1.0)
    bs = enumerate_branches(three_cycle, ss)
    assert [b.vertices for b in bs.branches] == THREE_CYCLE_BRANCHES
    assert [b.vertices for b in bs.between(1, 1)] == [(1, 2, 3, 1)]
    assert bs.m_statistic == 3


def test_enumerate_full_set_gives_edges(three_cycle):
    ss = compute_depths(three_cycle, [1, 2, 3], 1.0)
    bs = enumerate_branches(three_cycle, ss)
    assert [b.vertices for b in bs.branches] == [(1, 2), (2, 3), (3, 1)]


def test_enumerate_path_graph(path_graph):
    ss = compute_depths(path_graph, [1], 1.0)
    bs = enumerate_branches(path_graph, ss)
    assert [b.vertices for b in bs.branches] == PATH_BRANCHES
    assert sorted(all_branches_bruteforce(path_graph, [1])) == PATH_BRANCHES


def test_enumeration_matches_bruteforce():
    rng = np.random.default_rng(21)
    for _ in range(50):
        g = random_complex_graph(rng, int(rng.integers(3, 9)),
                                 float(rng.uniform(0.15, 0.5)))
        lam = complex(rng.normal(), rng.normal())
        ss = find_structural_set(g, lam)
        got = [b.vertices for b in enumerate_branches(g, ss).branches]
        assert got == all_branches_bruteforce(g, ss.members)


def test_branchset_indices_consistent(three_cycle):
    ss = compute_depths(three_cycle, [1], 1.0)
    bs = enumerate_branches(three_cycle, ss)
    for b in bs.branches:
        assert b in bs.from_vertex[b.start]
        assert b in bs.to_vertex[b.end]
        for v in set(b.interior):
            assert b in bs.through_vertex[v]
    for v, bucket in bs.through_vertex.items():
        assert len(bucket) <= bs.m_statistic
        assert v in ss.complement()
    assert (1, 2, 3, 1) in bs
    assert (1, 3) not in bs


def test_reduced_matrix_three_cycle(three_cycle):
    ss = compute_depths(three_cycle, [1], 2.0)
    r = reduced_matrix(three_cycle, ss, 2.0)
    assert r.entries.shape == (1, 1)
    assert r.entries[0, 0] == pytest.approx(0.25)
    # at the actual eigenvalue 1 the single entry equals the eigenvalue
    assert reduced_matrix(three_cycle, ss, 1.0).entries[0, 0] == pytest.approx(1.0)


def test_reduced_matrix_full_set_is_adjacency():
    rng = np.random.default_rng(22)
    g = random_complex_graph(rng, 5, 0.4)
    ss = compute_depths(g, g.vertices(), 3.7)
    r = reduced_matrix(g, ss, 3.7)
    assert np.allclose(r.entries, g.matrix())


def test_by_length_three_cycle(three_cycle):
    ss = compute_depths(three_cycle, [1], 2.0)
    bs = enumerate_branches(three_cycle, ss)
    r1 = reduced_matrix_by_length(three_cycle, ss, 2.0, 1, branches=bs)
    r2 = reduced_matrix_by_length(three_cycle, ss, 2.0, 2, branches=bs)
    r3 = reduced_matrix_by_length(three_cycle, ss, 2.0, 3, branches=bs)
    assert r1[0, 0] == 0 and r2[0, 0] == 0
    assert r3[0, 0] == pytest.approx(0.25)
    with pytest.raises(ValueError):
        reduced_matrix_by_length(three_cycle, ss, 2.0, 4, branches=bs)


def test_length_one_is_structural_block():
    rng = np.random.default_rng(23)
    g = random_complex_graph(rng, 6, 0.4)
    ss = find_structural_set(g, 0.5)
    block = reduced_matrix_by_length(g, ss, 0.5, 1)
    idx = [v - 1 for v in ss.members]
    assert np.allclose(block, g.matrix()[np.ix_(idx, idx)])


def test_length_partition_sums_to_reduced():
    rng = np.random.default_rng(24)
    for _ in range(25):
        g = random_complex_graph(rng, int(rng.integers(3, 9)),
                                 float(rng.uniform(0.2, 0.5)))
        lam = complex(rng.normal(), rng.normal())
        ss = find_structural_set(g, lam)
        bs = enumerate_branches(g, ss)
        total = sum(reduced_matrix_by_length(g, ss, lam, p, branches=bs)
                    for p in range(1, len(ss.complement()) + 2))
        r = reduced_matrix(g, ss, lam, branches=bs)
        scale = max(1.0, float(np.abs(r.entries).max()))
        assert np.abs(total - r.entries).max() <= 1e-12 * scale


def test_extended_three_cycle(three_cycle):
    ss = compute_depths(three_cycle, [1], 1.0)
    ext = extended_reduced_matrix(three_cycle, ss)
    expected = np.array([[1.0, 1.0, 1.0],
                         [1.0, 0.0, 1.0],
                         [1.0, 0.0, 0.0]])
    assert np.allclose(ext.entries, expected)


def test_extended_two_cycle(two_cycle):
    ss = compute_depths(two_cycle, [1], 1.0)
    ext = extended_reduced_matrix(two_cycle, ss)
    assert ext.entries[0, 0] == pytest.approx(1.0)  # via (1,2,1)
    assert ext.entries[1, 0] == pytest.approx(1.0)  # via (2,1)
    assert ext.entries[0, 1] == pytest.approx(1.0)  # via (1,2)
    # (2,1,2) is no branch: its interior vertex 1 sits in the structural set
    assert ext.entries[1, 1] == 0.0


def test_extended_full_set_is_adjacency(three_cycle):
    ss = compute_depths(three_cycle, [1, 2, 3], 1.0)
    ext = extended_reduced_matrix(three_cycle, ss)
    assert np.allclose(ext.entries, three_cycle.matrix().real)


def test_extended_requires_stochastic(path_graph):
    ss = compute_depths(path_graph, [1], 1.0)
    with pytest.raises(NonStochasticError):
        extended_reduced_matrix(path_graph, ss)


def test_stochastic_closure_columns_sum_to_one():
    # First-return probabilities over the structural set are exhaustive, so
    # each reduced column sums to 1; the same holds for the structural rows
    # of every extended column.
    rng = np.random.default_rng(25)
    for r in range(20):
        g = random_stochastic_graph(int(rng.integers(4, 12)), 2.5, rng)
        ss = find_structural_set(g, 1.0)
        bs = enumerate_branches(g, ss)
        red = reduced_matrix(g, ss, 1.0, branches=bs)
        assert np.allclose(red.entries.real.sum(axis=0), 1.0, atol=1e-10)
        ext = extended_reduced_matrix(g, ss, branches=bs)
        rows = [v - 1 for v in ss.members]
        assert np.allclose(ext.entries[rows, :].sum(axis=0), 1.0, atol=1e-10)


def test_branchset_sequences_roundtrip(three_cycle):
    ss = compute_depths(three_cycle, [1], 1.0)
    bs = enumerate_branches(three_cycle, ss)
    rebuilt = BranchSet(tuple(Branch(tuple(s)) for s in bs.sequences()))
    assert rebuilt.branches == bs.branches
