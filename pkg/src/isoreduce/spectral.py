"""Dominant eigenpairs of reduced matrices and eigenvector reconstruction.

The only eigensolver here is power iteration (plus a damped variant of it
for the eigenvalue/eigenvector co-iteration on reduced matrices); general
dense solvers are deliberately left to external test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (DegenerateRestrictionError, IterationError,
                         NotPrimitiveError, SingularWeightError)
from .graph import DEFAULT_TOL, StructuralSet, WeightedDigraph
from .reduction import BranchSet, reduced_matrix


@dataclass(frozen=True, eq=False)
class EigenPair:
    """An eigenvalue with its eigenvector over a stated vertex set.

    ``normalization`` is one of ``L1-positive`` (entries sum to 1, dominant
    vectors), ``L2-unit`` (unit Euclidean norm), or ``none`` (scale inherited
    from the input, used by the lift so that restriction is the identity).
    """

    lambda0: complex
    vector: np.ndarray
    vertices: tuple[int, ...]
    normalization: str = "L1-positive"
    residual: float = 0.0
    iterations: int = 0
    converged: bool = True

    def value_at(self, v: int) -> complex:
        return self.vector[self.vertices.index(v)]


def _support_lists(matrix: np.ndarray) -> list[list[int]]:
    n = matrix.shape[0]
    return [[j for j in range(n) if matrix[i, j] != 0] for i in range(n)]


def is_primitive(matrix) -> bool:
    """Whether a non-negative matrix is primitive (some power entrywise positive).

    Decided on the support digraph: strong connectivity plus an aperiodicity
    test via the gcd of closed-walk length discrepancies on a BFS tree.
    """
    m = np.asarray(matrix)
    n = m.shape[0]
    if n == 0:
        return False
    if n == 1:
        return m[0, 0] != 0
    out = _support_lists(m)
    rev = _support_lists(m.T)
    for lists in (out, rev):
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
    level = {0: 0}
    frontier = [0]
    g = 0
    while frontier:
        nxt = []
        for v in frontier:
            for u in out[v]:
                if u not in level:
                    level[u] = level[v] + 1
                    nxt.append(u)
        frontier = nxt
    for v in range(n):
        for u in out[v]:
            g = math.gcd(g, level[v] + 1 - level[u])
    return g == 1


def power_iteration(matrix, max_iters: int = 1000, tol: float = 1e-13, *,
                    assume_primitive: bool = False, lazy: bool = False,
                    init=None) -> EigenPair:
    """Dominant eigenpair of a non-negative square matrix by power iteration.

    The iterate is L1-normalized each step; convergence is declared when the
    L1 change drops below ``tol`` or the iteration cap is hit, whichever
    comes first (a capped run returns the best iterate with ``converged``
    False).  With ``lazy`` the iteration runs on (A + I)/2, which shares
    eigenvectors with A and converges even for periodic irreducible chains;
    the reported eigenvalue is mapped back.

    Raises:
        NotPrimitiveError: the primitivity check fails (pass
            ``assume_primitive`` to attest it instead).
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.size and a.min() < 0:
        # Cancellation noise from incremental maintenance may leave entries a
        # few ulp below zero; anything larger is a genuinely signed matrix.
        if a.min() < -1e-12 * max(1.0, float(np.abs(a).max())):
            raise ValueError("matrix must be non-negative")
        a = np.clip(a, 0.0, None)
    n = a.shape[0]
    if not assume_primitive and not is_primitive(a):
        raise NotPrimitiveError("matrix is not primitive")
    work = 0.5 * (a + np.eye(n)) if lazy else a
    if init is None:
        v = np.full(n, 1.0 / n)
    else:
        v = np.asarray(init, dtype=float).copy()
        s = v.sum()
        v = np.full(n, 1.0 / n) if s <= 0 else v / s
    lam = 0.0
    converged = False
    its = 0
    for its in range(1, max_iters + 1):
        w = work @ v
        s = w.sum()
        if s <= 0:
            raise ValueError("iterate collapsed to zero; matrix has a zero dominant value")
        lam = s
        w /= s
        if np.abs(w - v).sum() < tol:
            v = w
            converged = True
            break
        v = w
    lam_a = 2.0 * lam - 1.0 if lazy else lam
    residual = float(np.abs(a @ v - lam_a * v).sum())
    return EigenPair(lam_a, v, tuple(range(1, n + 1)), "L1-positive",
                     residual, its, converged)


def verify_restriction(graph: WeightedDigraph, structural: StructuralSet,
                    eigpair: EigenPair, *, branches: BranchSet | None = None,
                    tol: float = DEFAULT_TOL) -> float:
    """Relative residual of the reduced matrix acting on a restricted eigenvector.

    For an eigenpair of the full adjacency matrix whose eigenvalue admits the
    structural set, the restriction to the set is an eigenvector of the
    reduced matrix at the same eigenvalue; this returns
    ``norm(R u_S - lambda0 u_S) / norm(u_S)``.

    Raises:
        DegenerateRestrictionError: the restriction is numerically zero.
    """
    values = {v: eigpair.vector[t] for t, v in enumerate(eigpair.vertices)}
    u_s = np.array([values[v] for v in structural.members], dtype=complex)
    norm_s = np.linalg.norm(u_s)
    norm_full = np.linalg.norm(eigpair.vector)
    if norm_s == 0 or norm_s < 1e-13 * norm_full:
        raise DegenerateRestrictionError(
            "eigenvector restricts to zero on the structural set")
    r = reduced_matrix(graph, structural, eigpair.lambda0, branches=branches, tol=tol)
    return float(np.linalg.norm(r.entries @ u_s - eigpair.lambda0 * u_s) / norm_s)


def lift_eigenvector(graph: WeightedDigraph, structural: StructuralSet,
                     lambda0: complex, u_s, *, tol: float = DEFAULT_TOL) -> EigenPair:
    """Reconstruct a full eigenvector from its values on the structural set.

    Vertices are filled in increasing depth order: each complement vertex
    takes the weighted sum of its (already filled) out-neighbors divided by
    (lambda0 - its loop weight).  The input values are kept verbatim on the
    structural members, so the restriction of the result is the input.

    Raises:
        SingularWeightError: a complement loop weight coincides with lambda0
            (impossible while the structural set is valid).
    """
    members = structural.members
    u_s = np.asarray(u_s, dtype=complex)
    if u_s.shape != (len(members),):
        raise ValueError("restricted vector length does not match the structural set")
    values: dict[int, complex] = {v: u_s[t] for t, v in enumerate(members)}
    order = sorted((d, v) for v, d in structural.depth_of.items() if d > 0)
    for _, v in order:
        den = lambda0 - graph.weight(v, v)
        if abs(den) <= tol:
            raise SingularWeightError(
                f"cannot lift through vertex {v}: loop weight equals the eigenvalue")
        acc = 0j
        for j in graph.out_neighbors(v):
            if j != v:
                acc += complex(graph.weight(v, j)) * values[j]
        values[v] = acc / den
    ids = graph.vertices()
    vec = np.array([values[v] for v in ids], dtype=complex)
    m, _ = graph.active_matrix()
    scale = np.linalg.norm(vec)
    residual = float(np.linalg.norm(m @ vec - lambda0 * vec) / scale) if scale > 0 else 0.0
    return EigenPair(lambda0, vec, ids, "none", residual, 0, True)


def reduced_eigen_co_iteration(graph: WeightedDigraph, structural: StructuralSet,
                               initial_lambda: complex, initial_us, max_iters: int = 200,
                               tol: float = 1e-12, *, relax: float = 0.5,
                               branches: BranchSet | None = None,
                               weight_tol: float = DEFAULT_TOL) -> tuple[complex, np.ndarray]:
    """Joint fixed-point iteration for an eigenvalue of the reduced matrix.

    Updates the unit vector to the normalized image under the reduced matrix
    evaluated at the previous eigenvalue estimate, and the eigenvalue to the
    image's norm, relaxed by ``relax`` (1.0 applies the raw update, which
    oscillates around some fixed points; 0.5 damps it).

    Returns the fixed point ``(lambda, u)`` with ``R(lambda) u = lambda u``
    within ``tol``.

    Raises:
        IterationError: divergence, a singular branch weight at some
            eigenvalue estimate, or no convergence within ``max_iters``;
            carries the eigenvalue trace.
    """
    if not 0 < relax <= 1:
        raise ValueError("relax must be in (0, 1]")
    if branches is None:
        from .reduction import enumerate_branches
        branches = enumerate_branches(graph, structural)
    lam = complex(initial_lambda)
    u = np.asarray(initial_us, dtype=complex)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise ValueError("initial vector must be nonzero")
    u = u / nu
    trace = [lam]
    for _ in range(max_iters):
        try:
            r = reduced_matrix(graph, structural, lam, branches=branches,
                               tol=weight_tol).entries
        except SingularWeightError as exc:
            raise IterationError(
                f"reduced matrix singular at estimate {lam}", trace=trace) from exc
        w = r @ u
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            raise IterationError(f"iterate degenerated at estimate {lam}", trace=trace)
        lam_raw = complex(nw)
        u_new = w / nw
        top = u_new[int(np.argmax(np.abs(u_new)))]
        u_new = u_new * (abs(top) / top)
        lam_new = (1 - relax) * lam + relax * lam_raw
        done = abs(lam_raw - lam) < tol and np.linalg.norm(u_new - u) < tol
        lam, u = lam_new, u_new
        trace.append(lam)
        if done:
            return lam, u
    raise IterationError(f"no fixed point within {max_iters} iterations", trace=trace)
