"""Probabilistic reading of the reduction: taboo probabilities and stopped chains.

This module works with ROW-stochastic transition matrices, the standard
Markov-chain convention.  The rest of the package stores stochastic graphs
column-wise, so conversion happens here, at the module boundary, by
transposition.  Branch sums of the chain's own graph (adjacency = transition
matrix) then equal taboo probabilities index-for-index.
"""

from __future__ import annotations

from bisect import bisect
from dataclasses import dataclass

import numpy as np

from .exceptions import AmbiguousStationaryError, SimulationError
from .graph import (DEFAULT_TOL, StructuralSet, WeightedDigraph, compute_depths,
                    validate_structural)
from .reduction import enumerate_branches, reduced_matrix

#: Row-sum tolerance for transition matrices.
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Finite Markov chain given by a row-stochastic transition matrix."""

    transition: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("transition matrix must be square")
        if p.size and (p.min() < 0 or p.max() > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        sums = p.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise ValueError(f"row {i + 1} sums to {sums[i]}, expected 1")
        object.__setattr__(self, "transition", p)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @classmethod
    def from_stochastic_graph(cls, graph: WeightedDigraph) -> "MarkovChain":
        """Chain whose transition matrix is the transposed (column-stochastic)
        adjacency matrix of ``graph``."""
        if not graph.stochastic:
            raise ValueError("graph is not stochastic-flagged")
        if graph.removed:
            raise ValueError("compact the graph before building a chain from it")
        return cls(graph.matrix().real.T)

    def graph(self) -> WeightedDigraph:
        """The chain's own weighted digraph: edge (i, j) with weight p_ij."""
        return WeightedDigraph.from_matrix(self.transition)


@dataclass(frozen=True, eq=False)
class StoppedChainSample:
    """Trace of the chain observed at its successive visits to a state set."""

    seed: int
    steps: int
    members: tuple[int, ...]
    visits: tuple[int, ...]
    counts: np.ndarray
    empirical_transition: np.ndarray


def taboo_probability(chain: MarkovChain, taboo_set, i: int, j: int, n: int) -> float:
    """Probability of standing at ``j`` after ``n`` steps from ``i`` without
    visiting the taboo set at any strictly intermediate time."""
    if n < 1:
        raise ValueError("step count must be at least 1")
    p = chain.transition
    if n == 1:
        return float(p[i - 1, j - 1])
    comp = [s for s in range(chain.n_states) if (s + 1) not in set(taboo_set)]
    if not comp:
        return 0.0
    q = p[np.ix_(comp, comp)]
    row = p[i - 1, comp]
    for _ in range(n - 2):
        row = row @ q
    return float(row @ p[comp, j - 1])


def taboo_matrix(chain: MarkovChain, taboo_set, n: int) -> np.ndarray:
    """All-pairs taboo probabilities at step ``n`` as an N x N matrix."""
    if n < 1:
        raise ValueError("step count must be at least 1")
    p = chain.transition
    if n == 1:
        return p.copy()
    comp = [s for s in range(chain.n_states) if (s + 1) not in set(taboo_set)]
    if not comp:
        return np.zeros_like(p)
    q = p[np.ix_(comp, comp)]
    left = p[:, comp]
    for _ in range(n - 2):
        left = left @ q
    return left @ p[comp, :]


def verify_return_identity(graph: WeightedDigraph, structural: StructuralSet, *,
                           tol: float = DEFAULT_TOL) -> float:
    """Largest gap between length-partitioned branch sums and taboo probabilities.

    Converts the column-stochastic graph to its chain, rebuilds the reduction
    over the chain's row-oriented graph, and compares, for every pair of
    structural states and every feasible length, the branch-sum entry against
    the dynamic-programming taboo probability.  Also checks that the total
    branch sum matches the accumulated first-return probability.
    """
    chain = MarkovChain.from_stochastic_graph(graph)
    cg = chain.graph()
    members = structural.members
    cs = compute_depths(cg, members, 1.0, tol)
    branches = enumerate_branches(cg, cs)
    pos = {v: t for t, v in enumerate(members)}
    m = len(cs.complement())
    worst = 0.0
    totals = np.zeros((len(members), len(members)))
    for n in range(1, m + 2):
        tb = taboo_matrix(chain, members, n)
        r_n = np.zeros((len(members), len(members)))
        for (i, j), bucket in branches.by_endpoints.items():
            if i in pos and j in pos:
                for b in bucket:
                    if b.length == n:
                        w = 1.0
                        for a, c in zip(b.vertices, b.vertices[1:]):
                            w *= cg.weight(a, c).real
                        r_n[pos[i], pos[j]] += w
        totals += r_n
        for i in members:
            for j in members:
                worst = max(worst, abs(r_n[pos[i], pos[j]] - tb[i - 1, j - 1]))
    r_full = reduced_matrix(cg, cs, 1.0, branches=branches).entries.real
    worst = max(worst, float(np.abs(r_full - totals).max()))
    return worst


def simulate_stopped_chain(chain: MarkovChain, members, steps: int, seed: int, *,
                           start: int | None = None) -> StoppedChainSample:
    """Run the chain and record it at successive visits to ``members``.

    Reproducible for a fixed seed.  Raises SimulationError when the set is
    never reached within the step budget.
    """
    members = tuple(sorted(set(members)))
    s_pos = {v: t for t, v in enumerate(members)}
    n = chain.n_states
    for v in members:
        if not 1 <= v <= n:
            raise ValueError(f"state {v} outside 1..{n}")
    rng = np.random.default_rng(seed)
    cums = [np.cumsum(chain.transition[i]).tolist() for i in range(n)]
    state = 1 if start is None else start
    if not 1 <= state <= n:
        raise ValueError(f"start state {state} outside 1..{n}")
    visits: list[int] = []
    counts = np.zeros((len(members), len(members)), dtype=np.int64)
    prev = -1
    if state in s_pos:
        visits.append(state)
        prev = s_pos[state]
    uniforms = rng.random(steps).tolist()
    for u in uniforms:
        state = bisect(cums[state - 1], u) + 1
        t = s_pos.get(state, -1)
        if t >= 0:
            visits.append(state)
            if prev >= 0:
                counts[prev, t] += 1
            prev = t
    if not visits:
        raise SimulationError(
            f"chain never reached {members} within {steps} steps")
    rows = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        empirical = np.where(rows > 0, counts / np.maximum(rows, 1), 0.0)
    return StoppedChainSample(seed, steps, members, tuple(visits), counts, empirical)


def reduced_matrix_of_chain(chain: MarkovChain, members) -> np.ndarray:
    """Row-stochastic kernel of the stopped chain: the reduced matrix of the
    chain's graph over ``members`` at parameter 1."""
    members = tuple(sorted(set(members)))
    cg = chain.graph()
    cs = compute_depths(cg, members, 1.0)
    return reduced_matrix(cg, cs, 1.0).entries.real


def is_irreducible(chain: MarkovChain) -> bool:
    """Strong connectivity of the transition support."""
    p = chain.transition
    n = chain.n_states
    for mat in (p, p.T):
        lists = [[j for j in range(n) if mat[i, j] > 0] for i in range(n)]
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                for u in lists[v]:
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        if len(seen) != n:
            return False
    return True


def stationary_distribution(chain: MarkovChain) -> np.ndarray:
    """Unique stationary distribution, by dense linear solve.

    Raises:
        AmbiguousStationaryError: the chain is reducible, so uniqueness fails.
    """
    if not is_irreducible(chain):
        raise AmbiguousStationaryError(
            "chain is reducible; stationary distribution is not unique")
    n = chain.n_states
    a = chain.transition.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    q = np.linalg.solve(a, b)
    return q


def verify_stationary_restriction(chain: MarkovChain, members, *,
                                  tol: float = DEFAULT_TOL) -> float:
    """Gap between the restricted stationary distribution and the one of the
    stopped chain's kernel.

    The stationary distribution restricted to the set (renormalized) must be
    stationary for the reduced matrix of the chain's graph over the set.
    """
    members = tuple(sorted(set(members)))
    cg = chain.graph()
    for v in cg.vertices():
        if v not in set(members) and cg.has_edge(v, v):
            raise ValueError(f"complement state {v} has a self-transition")
    result = validate_structural(cg, members, 1.0, tol)
    if not result:
        raise ValueError("the given set is not structural for the chain at 1")
    cs = compute_depths(cg, members, 1.0, tol)
    q = stationary_distribution(chain)
    q_s = np.array([q[v - 1] for v in members])
    q_s = q_s / q_s.sum()
    r = reduced_matrix(cg, cs, 1.0).entries.real
    q_r = stationary_distribution(MarkovChain(r))
    return float(np.abs(q_s - q_r).max())


def total_variation_summary(sample: StoppedChainSample,
                            expected: np.ndarray) -> float:
    """Largest per-state total-variation distance between empirical and
    expected stopped-chain transition rows (rows never visited are skipped)."""
    rows = sample.counts.sum(axis=1)
    worst = 0.0
    for i in range(len(sample.members)):
        if rows[i] == 0:
            continue
        tv = 0.5 * float(np.abs(sample.empirical_transition[i] - expected[i]).sum())
        worst = max(worst, tv)
    return worst


def within_sigma_fraction(sample: StoppedChainSample, expected: np.ndarray,
                          sigmas: float = 3.0) -> float:
    """Fraction of transition entries whose empirical frequency sits within
    ``sigmas`` binomial standard errors of the expected probability.

    Entries with zero standard error must match exactly; rows never visited
    contribute no entries.
    """
    counts = sample.counts
    emp = sample.empirical_transition
    rows = counts.sum(axis=1)
    ok = 0
    total = 0
    for i in range(len(sample.members)):
        if rows[i] == 0:
            continue
        for j in range(len(sample.members)):
            p = expected[i, j]
            se = np.sqrt(max(p * (1 - p), 0.0) / rows[i])
            total += 1
            if abs(emp[i, j] - p) <= sigmas * se:
                ok += 1
    return ok / total if total else 1.0
