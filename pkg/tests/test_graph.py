import numpy as np
import pytest

from isoreduce import (NonStochasticError, StructuralSetError, WeightedDigraph,
                       compute_depths, find_structural_set, nilpotency_index,
                       validate_structural)
from oracles import random_complex_graph


def test_graph_construction_and_queries(three_cycle):
    assert three_cycle.vertices() == (1, 2, 3)
    assert three_cycle.weight(1, 2) == 1.0
    assert three_cycle.weight(2, 1) == 0
    assert three_cycle.has_edge(3, 1)
    assert three_cycle.out_neighbors(1) == (2,)
    assert three_cycle.in_neighbors(1) == (3,)
    m = three_cycle.matrix()
    assert m[0, 1] == 1.0 and m[1, 0] == 0


def test_zero_weight_and_bad_vertex_rejected():
    with pytest.raises(ValueError):
        WeightedDigraph.from_edges(2, [(1, 2, 0.0)])
    with pytest.raises(ValueError):
        WeightedDigraph.from_edges(2, [(1, 3, 1.0)])
    with pytest.raises(ValueError):
        WeightedDigraph.from_edges(2, [(1, 2, 0.5), (1, 2, 0.5)])


def test_stochastic_validation():
    with pytest.raises(NonStochasticError):
        WeightedDigraph.from_edges(2, [(1, 2, 1.0), (2, 1, 0.5)], stochastic=True)
    with pytest.raises(NonStochasticError):
        WeightedDigraph.from_edges(2, [(1, 2, 1.0), (2, 1, 1.0), (1, 1, 1.0)],
                                   stochastic=True)
    with pytest.raises(NonStochasticError):
        WeightedDigraph.from_edges(2, [(1, 2, 1.0 + 0.5j), (2, 1, 1.0)],
                                   stochastic=True)


def test_tombstones_and_compact():
    g = WeightedDigraph.from_edges(4, [(1, 2, 1.0), (2, 4, 1.0), (4, 1, 1.0)],
                                   removed=[3])
    assert g.vertices() == (1, 2, 4)
    assert g.n_active == 3
    compacted, mapping = g.compact()
    assert compacted.vertices() == (1, 2, 3)
    assert mapping == {1: 1, 2: 2, 4: 3}
    assert compacted.weight(2, 3) == 1.0
    with pytest.raises(ValueError):
        WeightedDigraph.from_edges(4, [(1, 3, 1.0)], removed=[3])


def test_validate_structural_three_cycle(three_cycle):
    assert validate_structural(three_cycle, [1], 1.0)
    assert validate_structural(three_cycle, [2], 1.0)
    with pytest.raises(ValueError):
        validate_structural(three_cycle, [], 1.0)


def test_validate_structural_loop_witness():
    g = WeightedDigraph.from_edges(
        3, [(1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0), (2, 2, 1.0)])
    result = validate_structural(g, [1], 1.0)
    assert not result
    assert result.vertex == 2
    assert validate_structural(g, [1], 2.0)


def test_validate_structural_cycle_witness():
    g = WeightedDigraph.from_edges(
        3, [(1, 2, 1.0), (2, 3, 1.0), (3, 2, 1.0), (3, 1, 1.0)])
    result = validate_structural(g, [1], 1.0)
    assert not result
    cyc = result.cycle
    assert cyc[0] == cyc[-1]
    assert 1 not in cyc
    for a, b in zip(cyc, cyc[1:]):
        assert g.has_edge(a, b)


def test_find_structural_set_examples(three_cycle, path_graph):
    ss = find_structural_set(three_cycle, 1.0)
    assert len(ss.members) == 1
    assert validate_structural(three_cycle, ss.members, 1.0)

    ss = find_structural_set(path_graph, 1.0)
    assert len(ss.members) == 1

    g = WeightedDigraph.from_edges(3, [(1, 1, 2.0), (2, 2, 2.0), (3, 3, 2.0),
                                       (1, 2, 1.0)])
    ss = find_structural_set(g, 2.0)
    assert ss.members == (1, 2, 3)
    assert ss.max_depth == 0


def test_compute_depths_examples(three_cycle, path_graph):
    ss = compute_depths(three_cycle, [1], 1.0)
    assert dict(ss.depth_of) == {1: 0, 3: 1, 2: 2}
    assert ss.max_depth == 2
    assert ss.depth_counts() == [1, 2, 3]
    assert ss.depth_sets()[0] == [1]
    assert ss.depth_sets()[2] == [1, 2, 3]

    full = compute_depths(three_cycle, [1, 2, 3], 1.0)
    assert full.max_depth == 0
    assert set(full.depth_of.values()) == {0}

    ss = compute_depths(path_graph, [1], 1.0)
    assert dict(ss.depth_of) == {1: 0, 2: 1, 3: 2, 4: 3}


def test_compute_depths_rejects_invalid(three_cycle):
    g = WeightedDigraph.from_edges(
        3, [(1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0), (2, 2, 1.0)])
    with pytest.raises(StructuralSetError) as info:
        compute_depths(g, [1], 1.0)
    assert info.value.vertex == 2


def test_nilpotency_examples(three_cycle):
    assert nilpotency_index(three_cycle, [1]) == 2
    assert nilpotency_index(three_cycle, [1, 2, 3]) == 0
    g = WeightedDigraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0),
                                       (2, 2, 0.5)])
    assert nilpotency_index(g, [1]) is None
    assert nilpotency_index(g, [1, 2]) == 1


def test_nilpotency_matches_literal_matrix_powers():
    rng = np.random.default_rng(10)
    for _ in range(40):
        g = random_complex_graph(rng, int(rng.integers(3, 8)), 0.3, loops=False)
        members = find_structural_set(g, 0.0).members
        idx = nilpotency_index(g, members)
        comp = [v for v in g.vertices() if v not in set(members)]
        sub = g.matrix()[np.ix_([v - 1 for v in comp], [v - 1 for v in comp])]
        if idx is None:
            continue
        if idx == 0:
            assert len(comp) == 0
            continue
        power = np.linalg.matrix_power(sub, idx)
        assert np.abs(power).max() < 1e-12
        if idx > 1:
            prev = np.linalg.matrix_power(sub, idx - 1)
            assert np.abs(prev).max() > 1e-12


def test_structural_iff_nilpotent_on_loopfree_complements():
    rng = np.random.default_rng(11)
    for _ in range(60):
        g = random_complex_graph(rng, int(rng.integers(3, 9)), 0.35, loops=False)
        n = g.n_vertices
        size = int(rng.integers(1, n + 1))
        members = sorted(rng.choice(g.vertices(), size=size, replace=False).tolist())
        lam = complex(rng.normal(), rng.normal())
        valid = bool(validate_structural(g, members, lam))
        nilp = nilpotency_index(g, members)
        diag_ok = all(abs(g.weight(v, v) - lam) > 1e-12
                      for v in g.vertices() if v not in set(members))
        assert valid == ((nilp is not None) and diag_ok)
        if valid:
            ss = compute_depths(g, members, lam)
            assert ss.max_depth == nilp


def test_depth_order_triangularizes_complement():
    # Sorting the complement by decreasing depth must make its adjacency
    # block strictly upper triangular.
    rng = np.random.default_rng(12)
    for _ in range(30):
        g = random_complex_graph(rng, int(rng.integers(4, 9)), 0.3, loops=False)
        ss = find_structural_set(g, 1.0)
        comp = sorted(ss.complement(), key=lambda v: (-ss.depth_of[v], v))
        sub = g.matrix()[np.ix_([v - 1 for v in comp], [v - 1 for v in comp])]
        assert np.abs(np.tril(sub)).max() == 0


def test_find_structural_set_always_valid():
    rng = np.random.default_rng(13)
    for _ in range(60):
        g = random_complex_graph(rng, int(rng.integers(3, 10)), float(rng.uniform(0.15, 0.6)))
        lam = complex(rng.normal(), rng.normal())
        ss = find_structural_set(g, lam)
        assert validate_structural(g, ss.members, lam)
