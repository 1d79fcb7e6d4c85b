"""Branch enumeration and reduced matrices over a structural set.

A branch is a path whose interior vertices all avoid the structural set;
the final vertex may close a cycle back onto the first.  Reduced-matrix
entries sum branch weights between vertex pairs at a fixed spectral
parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonStochasticError, SingularWeightError
from .graph import DEFAULT_TOL, StructuralSet, WeightedDigraph


@dataclass(frozen=True, order=True)
class Branch:
    """A branch, identified by its vertex sequence."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise ValueError("a branch has at least one edge")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def interior(self) -> tuple[int, ...]:
        return self.vertices[1:-1]


@dataclass(frozen=True)
class BranchSet:
    """All branches of a graph/structural-set pair, with endpoint indices.

    Buckets are lexicographically sorted for reproducible output.  The
    ``m_statistic`` is the largest number of branches starting at, ending
    at, or passing through any single vertex.
    """

    branches: tuple[Branch, ...]
    by_endpoints: dict = field(init=False, repr=False, compare=False)
    from_vertex: dict = field(init=False, repr=False, compare=False)
    to_vertex: dict = field(init=False, repr=False, compare=False)
    through_vertex: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(sorted(self.branches)))
        ends: dict[tuple[int, int], list[Branch]] = {}
        outs: dict[int, list[Branch]] = {}
        ins: dict[int, list[Branch]] = {}
        through: dict[int, list[Branch]] = {}
        for b in self.branches:
            ends.setdefault((b.start, b.end), []).append(b)
            outs.setdefault(b.start, []).append(b)
            ins.setdefault(b.end, []).append(b)
            for v in set(b.interior):
                through.setdefault(v, []).append(b)
        object.__setattr__(self, "by_endpoints", {k: tuple(v) for k, v in ends.items()})
        object.__setattr__(self, "from_vertex", {k: tuple(v) for k, v in outs.items()})
        object.__setattr__(self, "to_vertex", {k: tuple(v) for k, v in ins.items()})
        object.__setattr__(self, "through_vertex", {k: tuple(v) for k, v in through.items()})

    def __len__(self) -> int:
        return len(self.branches)

    def __contains__(self, item) -> bool:
        b = item if isinstance(item, Branch) else Branch(tuple(item))
        bucket = self.by_endpoints.get((b.start, b.end), ())
        return b in bucket

    def between(self, i: int, j: int) -> tuple[Branch, ...]:
        return self.by_endpoints.get((i, j), ())

    @property
    def m_statistic(self) -> int:
        candidates = [len(v) for v in self.from_vertex.values()]
        candidates += [len(v) for v in self.to_vertex.values()]
        candidates += [len(v) for v in self.through_vertex.values()]
        return max(candidates, default=0)

    def sequences(self) -> list[list[int]]:
        """Plain vertex-sequence lists, for the JSON manifest."""
        return [list(b.vertices) for b in self.branches]


def branch_weight(graph: WeightedDigraph, branch: Branch, lam: complex,
                  tol: float = DEFAULT_TOL) -> complex:
    """Weight of a branch at the given spectral parameter.

    The first edge contributes its weight; each interior vertex contributes
    its outgoing edge weight divided by (lam - loop weight).  Endpoint loops
    never enter a denominator.

    Raises:
        SingularWeightError: an interior denominator is within ``tol`` of zero.
    """
    v = branch.vertices
    for a, b in zip(v, v[1:]):
        if not graph.has_edge(a, b):
            raise ValueError(f"branch step ({a},{b}) is not an edge")
    w = complex(graph.weight(v[0], v[1]))
    for pos in range(1, len(v) - 1):
        den = lam - graph.weight(v[pos], v[pos])
        if abs(den) <= tol:
            raise SingularWeightError(
                f"interior vertex {v[pos]} has loop weight within {tol} of {lam}")
        w *= complex(graph.weight(v[pos], v[pos + 1])) / den
    return w


def enumerate_branches(graph: WeightedDigraph, structural: StructuralSet) -> BranchSet:
    """Enumerate every branch of the pair, complete and duplicate-free.

    Depth-first from each start vertex, descending only into the complement;
    since the complement carries no non-loop cycles the search terminates
    with interiors no longer than the structural depth.
    """
    comp = set(structural.complement())
    found: list[Branch] = []
    for i0 in graph.vertices():
        stack: list[tuple[int, ...]] = [(i0,)]
        while stack:
            path = stack.pop()
            interior = set(path[1:])
            for y in graph.out_neighbors(path[-1]):
                if y in interior:
                    continue
                found.append(Branch(path + (y,)))
                if y != i0 and y in comp:
                    stack.append(path + (y,))
    return BranchSet(tuple(found))


@dataclass(frozen=True, eq=False)
class ReducedMatrix:
    """Square matrix of branch-weight sums between structural vertices."""

    members: tuple[int, ...]
    lam: complex
    entries: np.ndarray

    def index_of(self, v: int) -> int:
        return self.members.index(v)


@dataclass(frozen=True, eq=False)
class ExtendedReducedMatrix:
    """Branch-weight sums between all vertex pairs (stochastic case, lam=1)."""

    n_vertices: int
    members: tuple[int, ...]
    entries: np.ndarray


def reduced_matrix(graph: WeightedDigraph, structural: StructuralSet,
                   lam: complex | None = None, *, branches: BranchSet | None = None,
                   tol: float = DEFAULT_TOL) -> ReducedMatrix:
    """Reduced matrix over the structural members at ``lam``.

    ``lam`` defaults to the structural set's own parameter; passing another
    value re-evaluates the same branches there (used by the eigenvalue
    co-iteration).
    """
    if lam is None:
        lam = structural.lam
    if branches is None:
        branches = enumerate_branches(graph, structural)
    members = structural.members
    pos = {v: t for t, v in enumerate(members)}
    out = np.zeros((len(members), len(members)), dtype=complex)
    for i in members:
        for j in members:
            for b in branches.between(i, j):
                out[pos[i], pos[j]] += branch_weight(graph, b, lam, tol)
    return ReducedMatrix(members, lam, out)


def reduced_matrix_by_length(graph: WeightedDigraph, structural: StructuralSet,
                             lam: complex | None = None, p: int = 1, *,
                             branches: BranchSet | None = None,
                             tol: float = DEFAULT_TOL) -> np.ndarray:
    """Contribution of length-``p`` branches to the reduced matrix.

    Summing over p = 1 .. (complement size + 1) recovers the full matrix.
    """
    if lam is None:
        lam = structural.lam
    m = len(structural.complement())
    if not 1 <= p <= m + 1:
        raise ValueError(f"branch length {p} outside 1..{m + 1}")
    if branches is None:
        branches = enumerate_branches(graph, structural)
    members = structural.members
    pos = {v: t for t, v in enumerate(members)}
    out = np.zeros((len(members), len(members)), dtype=complex)
    for i in members:
        for j in members:
            for b in branches.between(i, j):
                if b.length == p:
                    out[pos[i], pos[j]] += branch_weight(graph, b, lam, tol)
    return out


def extended_reduced_matrix(graph: WeightedDigraph, structural: StructuralSet, *,
                            branches: BranchSet | None = None,
                            tol: float = DEFAULT_TOL) -> ExtendedReducedMatrix:
    """Branch-weight sums between every vertex pair, at parameter 1.

    Only defined for stochastic graphs (real weights, no loops, unit column
    sums); rows and columns of removed vertices are zero.
    """
    if not graph.stochastic:
        raise NonStochasticError("extended reduced matrix requires a stochastic graph")
    if abs(structural.lam - 1) > tol:
        raise ValueError("extended reduced matrix is evaluated at parameter 1")
    if branches is None:
        branches = enumerate_branches(graph, structural)
    n = graph.n_vertices
    out = np.zeros((n, n), dtype=float)
    for b in branches.branches:
        out[b.start - 1, b.end - 1] += branch_weight(graph, b, 1.0, tol).real
    return ExtendedReducedMatrix(n, structural.members, out)
