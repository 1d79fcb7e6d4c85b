"""Incremental maintenance of the reduction under graph deltas.

A stored state bundles a stochastic graph with its structural set, branch
set, extended reduced matrix, and dominant eigenvectors.  A delta (a short
list of vertex/edge insertions and removals) is applied one operation at a
time: the matrix is edited and affected columns renormalized, the structural
set grows by the promotion rule when a new edge closes a cycle outside it,
branches are patched rather than re-enumerated, and the extended matrix
absorbs the weight differences.  The dominant eigenvector is then recomputed
on the reduced block and lifted through the depth hierarchy, and an itemized
cost report compares the work against full re-iteration of the big matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DeltaError, NonStochasticError, NotPrimitiveError
from .graph import (StructuralSet, WeightedDigraph, compute_depths,
                    find_structural_set, validate_structural)
from .reduction import (Branch, BranchSet, ExtendedReducedMatrix,
                        enumerate_branches, extended_reduced_matrix)
from .spectral import is_primitive, lift_eigenvector, power_iteration


@dataclass(frozen=True)
class DeltaOp:
    """One graph modification: add/remove a vertex or an edge.

    Edge weights are given raw; the affected column is renormalized to unit
    sum after the edit, so the raw value only sets the new edge's share.
    """

    kind: str
    i: int = 0
    j: int = 0
    w: float = 0.0
    v: int = 0

    KINDS = ("add_edge", "remove_edge", "add_vertex", "remove_vertex")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown delta op kind {self.kind!r}")

    @classmethod
    def add_edge(cls, i: int, j: int, w: float) -> "DeltaOp":
        return cls("add_edge", i=i, j=j, w=w)

    @classmethod
    def remove_edge(cls, i: int, j: int) -> "DeltaOp":
        return cls("remove_edge", i=i, j=j)

    @classmethod
    def add_vertex(cls) -> "DeltaOp":
        return cls("add_vertex")

    @classmethod
    def remove_vertex(cls, v: int) -> "DeltaOp":
        return cls("remove_vertex", v=v)


@dataclass(frozen=True)
class GraphDelta:
    """An ordered list of modifications applied atomically."""

    ops: tuple[DeltaOp, ...]

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def size(self) -> int:
        return len(self.ops)


@dataclass(frozen=True, eq=False)
class StoredState:
    """Mutually consistent snapshot: graph, reduction data, eigenvectors."""

    graph: WeightedDigraph
    structural: StructuralSet
    branches: BranchSet
    extended: ExtendedReducedMatrix
    reduced_vector: np.ndarray
    full_vector: np.ndarray
    eig_converged: bool = True

    @classmethod
    def from_graph(cls, graph: WeightedDigraph, *, structural=None,
                   ell: int = 2000, tol: float = 1e-13,
                   assume_primitive: bool = False) -> "StoredState":
        """Compute every stored field from scratch for a stochastic graph."""
        if not graph.stochastic:
            raise NonStochasticError("stored state requires a stochastic graph")
        mat, _ = graph.active_matrix()
        if not assume_primitive and not is_primitive(mat):
            raise NotPrimitiveError("adjacency matrix is not primitive")
        if structural is None:
            ss = find_structural_set(graph, 1.0)
        elif isinstance(structural, StructuralSet):
            ss = compute_depths(graph, structural.members, 1.0)
        else:
            ss = compute_depths(graph, structural, 1.0)
        branches = enumerate_branches(graph, ss)
        ext = extended_reduced_matrix(graph, ss, branches=branches)
        idx = [v - 1 for v in ss.members]
        pair = power_iteration(ext.entries[np.ix_(idx, idx)], ell, tol,
                               assume_primitive=True, lazy=True)
        full = _lift_full(graph, ss, pair.vector)
        return cls(graph, ss, branches, ext, pair.vector, full, pair.converged)

    def reduced_block(self) -> np.ndarray:
        idx = [v - 1 for v in self.structural.members]
        return self.extended.entries[np.ix_(idx, idx)]

    def consistency_report(self, *, ell: int = 2000, tol: float = 1e-13) -> dict[str, float]:
        """Deviation of every stored field from a from-scratch recomputation.

        Sets report 0.0 when equal and inf otherwise; matrices and vectors
        report the max absolute entry difference.
        """
        out: dict[str, float] = {}
        ok = validate_structural(self.graph, self.structural.members, 1.0)
        out["structural"] = 0.0 if ok else float("inf")
        if not ok:
            return out
        ss = compute_depths(self.graph, self.structural.members, 1.0)
        fresh = enumerate_branches(self.graph, ss)
        same = {b.vertices for b in fresh.branches} == {b.vertices for b in self.branches.branches}
        out["branches"] = 0.0 if same else float("inf")
        ext = extended_reduced_matrix(self.graph, ss, branches=fresh)
        if ext.entries.shape == self.extended.entries.shape:
            out["extended"] = float(np.abs(ext.entries - self.extended.entries).max())
        else:
            out["extended"] = float("inf")
        idx = [v - 1 for v in ss.members]
        pair = power_iteration(ext.entries[np.ix_(idx, idx)], ell, tol,
                               assume_primitive=True, lazy=True)
        if pair.vector.shape == self.reduced_vector.shape:
            out["reduced_vector"] = float(np.abs(pair.vector - self.reduced_vector).max())
        else:
            out["reduced_vector"] = float("inf")
        full = _lift_full(self.graph, ss, pair.vector)
        if full.shape == self.full_vector.shape:
            out["full_vector"] = float(np.abs(full - self.full_vector).max())
        else:
            out["full_vector"] = float("inf")
        return out


def _lift_full(graph: WeightedDigraph, ss: StructuralSet, reduced_vec: np.ndarray) -> np.ndarray:
    """Lift a reduced dominant vector and embed it L1-normalized over all slots."""
    pair = lift_eigenvector(graph, ss, 1.0, reduced_vec)
    full = np.zeros(graph.n_vertices)
    for t, v in enumerate(pair.vertices):
        full[v - 1] = pair.vector[t].real
    total = full.sum()
    if total <= 0:
        raise ValueError("lifted vector has non-positive mass")
    return full / total


@dataclass(frozen=True)
class CostReport:
    """Itemized model costs of one update session against full re-iteration.

    Step costs follow the update algorithm's own estimates: branch and
    matrix patching are charged the per-object bound, the reduced eigenvector
    solve is charged cubically in the new structural size, and the lift is
    charged by the depth-layer recursion.  ``touched_branches`` and
    ``weight_updates`` carry the measured counterparts for reference.
    """

    n: int
    s: int
    s_new: int
    k: int
    k_new: int
    m: int
    ell: int
    p: int
    step3_cost: float
    step4_cost: float
    step5_cost: float
    step6_cost: float
    touched_branches: int = 0
    weight_updates: int = 0
    structural_fallback: bool = False
    meas_ratio: float = 0.1

    @property
    def baseline(self) -> float:
        return float(self.ell) * self.n ** 3

    @property
    def update_cost(self) -> float:
        return self.step3_cost + self.step4_cost + self.step5_cost + self.step6_cost

    @property
    def savings(self) -> float:
        return 1.0 - self.update_cost / self.baseline

    @property
    def depth_within_model(self) -> bool:
        return self.k_new <= self.k + self.p

    def meas_conditions(self) -> dict[str, bool]:
        r = self.meas_ratio
        return {
            "p_much_less_s": self.p <= r * self.s,
            "s_much_less_n": self.s <= r * self.n,
            "k_plus_p_much_less_n": self.k + self.p <= r * self.n,
            "patch_much_less_n3": self.p * (self.k + 1) * self.m <= r * self.n ** 3,
        }

    @property
    def meets_meas(self) -> bool:
        return all(self.meas_conditions().values())

    def validate(self) -> None:
        """Check the internal cost-model invariants; raises ValueError."""
        slack = 1e-9
        problems = []
        patch_bound = self.p * (self.k + 1) * self.m
        if not 0 <= self.step3_cost <= patch_bound + slack:
            problems.append(f"step3 {self.step3_cost} exceeds {patch_bound}")
        if not 0 <= self.step4_cost <= patch_bound + slack:
            problems.append(f"step4 {self.step4_cost} exceeds {patch_bound}")
        if abs(self.step5_cost - self.ell * self.s_new ** 3) > slack:
            problems.append(f"step5 {self.step5_cost} != ell*s'^3")
        lift_bound = self.k_new * self.n ** 2 / 2
        if self.step6_cost > lift_bound + slack:
            problems.append(f"step6 {self.step6_cost} exceeds k'*N^2/2 = {lift_bound}")
        if self.depth_within_model:
            model_bound = (self.k + self.p) * self.n ** 2 / 2
            if self.step6_cost > model_bound + slack:
                problems.append(f"step6 {self.step6_cost} exceeds (k+p)*N^2/2 = {model_bound}")
        if problems:
            raise ValueError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "measurements": {"n": self.n, "s": self.s, "s_new": self.s_new,
                             "k": self.k, "k_new": self.k_new, "m": self.m,
                             "ell": self.ell, "p": self.p},
            "costs": {"step3": self.step3_cost, "step4": self.step4_cost,
                      "step5": self.step5_cost, "step6": self.step6_cost,
                      "baseline": self.baseline, "total": self.update_cost},
            "measured": {"touched_branches": self.touched_branches,
                         "weight_updates": self.weight_updates},
            "savings": self.savings,
            "structural_fallback": self.structural_fallback,
            "depth_within_model": self.depth_within_model,
            "meas_conditions": self.meas_conditions(),
            "meets_meas": self.meets_meas,
        }

    @classmethod
    def from_measurements(cls, n: int, s: int, k: int, m: int, ell: int, p: int,
                          ratio: float = 0.1) -> "CostReport":
        """Build a model-only report from headline measurements.

        Used to sanity-check reported figures: patch steps are charged their
        full bound, the lift its simplex-lemma worst case at depth k+p.
        """
        k_new = k + p
        patch = float(p * (k + 1) * m)
        step6 = k_new * (k_new * n * n / (2.0 * (k_new + 1))) if k_new else 0.0
        return cls(n=n, s=s, s_new=s, k=k, k_new=k_new, m=m, ell=ell, p=p,
                   step3_cost=patch, step4_cost=patch,
                   step5_cost=float(ell) * s ** 3, step6_cost=step6,
                   touched_branches=int(patch), weight_updates=int(patch),
                   meas_ratio=ratio)


def simplex_bound(x) -> tuple[float, float]:
    """Evaluate the lift-cost functional on a monotone sequence and its bound.

    For 0 <= x_0 <= ... <= x_m = N, returns (F, m*N^2/(2(m+1))) where
    F = sum x_{i-1} (x_i - x_{i-1}).  F never exceeds the bound, which never
    exceeds N^2/2; equality in the first holds exactly at the arithmetic
    progression.
    """
    xs = [float(v) for v in x]
    if len(xs) < 2:
        raise ValueError("need at least two coordinates")
    if xs[0] < 0:
        raise ValueError("coordinates must be non-negative")
    for a, b in zip(xs, xs[1:]):
        if b < a:
            raise ValueError("sequence must be non-decreasing")
    big_n = xs[-1]
    m = len(xs) - 1
    f = sum(xs[t - 1] * (xs[t] - xs[t - 1]) for t in range(1, len(xs)))
    bound = m * big_n * big_n / (2.0 * (m + 1))
    if f > bound + 1e-9 * max(1.0, big_n * big_n) or bound > big_n * big_n / 2 + 1e-12:
        raise RuntimeError("simplex bound violated; non-monotone input slipped through")
    return f, bound


class _Editor:
    """Mutable weight table with column renormalization; step-1 bookkeeping."""

    def __init__(self, graph: WeightedDigraph):
        self.n = graph.n_vertices
        self.removed = set(graph.removed)
        self.w: dict[tuple[int, int], float] = {
            e: complex(val).real for e, val in graph.weights.items()}
        self.out: dict[int, set[int]] = {v: set() for v in graph.vertices()}
        self.into: dict[int, set[int]] = {v: set() for v in graph.vertices()}
        for (i, j) in self.w:
            self.out[i].add(j)
            self.into[j].add(i)

    def active(self, v: int) -> bool:
        return 1 <= v <= self.n and v not in self.removed

    def _renorm(self, j: int) -> None:
        total = sum(self.w[(x, j)] for x in self.into[j])
        if total <= 0:
            return
        for x in self.into[j]:
            self.w[(x, j)] /= total

    def add_edge(self, i: int, j: int, w: float) -> None:
        if not self.active(i) or not self.active(j):
            raise DeltaError(f"add_edge({i},{j}) references an inactive vertex")
        if i == j:
            raise DeltaError(f"loop ({i},{i}) is not allowed")
        if (i, j) in self.w:
            raise DeltaError(f"edge ({i},{j}) already exists")
        if not (np.isfinite(w) and w > 0):
            raise DeltaError(f"edge weight must be positive, got {w}")
        self.w[(i, j)] = float(w)
        self.out[i].add(j)
        self.into[j].add(i)
        self._renorm(j)

    def remove_edge(self, i: int, j: int) -> None:
        if (i, j) not in self.w:
            raise DeltaError(f"edge ({i},{j}) does not exist")
        del self.w[(i, j)]
        self.out[i].discard(j)
        self.into[j].discard(i)
        self._renorm(j)

    def add_vertex(self) -> int:
        self.n += 1
        self.out[self.n] = set()
        self.into[self.n] = set()
        return self.n

    def remove_vertex(self, v: int) -> set[int]:
        if not self.active(v):
            raise DeltaError(f"remove_vertex({v}) references an inactive vertex")
        targets = set(self.out[v])
        for y in targets:
            del self.w[(v, y)]
            self.into[y].discard(v)
        for x in set(self.into[v]):
            del self.w[(x, v)]
            self.out[x].discard(v)
        del self.out[v]
        del self.into[v]
        self.removed.add(v)
        for y in targets:
            self._renorm(y)
        return targets

    def graph(self, stochastic: bool = True) -> WeightedDigraph:
        return WeightedDigraph(self.n, dict(self.w), stochastic=stochastic,
                               removed=frozenset(self.removed))


def apply_ops(graph: WeightedDigraph, delta: GraphDelta) -> WeightedDigraph:
    """Apply a delta to the matrix alone (step 1), atomically.

    Columns touched by an edit are renormalized to unit sum.  The result is
    validated stochastic; any failure rejects the whole delta.
    """
    ed = _Editor(graph)
    for op in delta.ops:
        if op.kind == "add_edge":
            ed.add_edge(op.i, op.j, op.w)
        elif op.kind == "remove_edge":
            ed.remove_edge(op.i, op.j)
        elif op.kind == "add_vertex":
            ed.add_vertex()
        else:
            ed.remove_vertex(op.v)
    try:
        return ed.graph()
    except NonStochasticError as exc:
        raise DeltaError(f"delta leaves the graph non-stochastic: {exc}") from exc


def promotion_rule(members, branches, i: int, j: int) -> int | None:
    """Structural-set update for a new edge (i, j) (step 2).

    Returns the vertex to promote (``i``) when both endpoints lie outside the
    set and some branch already runs from j back to i, so the new edge would
    close a cycle avoiding the set.  Returns None otherwise.
    """
    s = set(members)
    if i in s or j in s:
        return None
    if isinstance(branches, BranchSet):
        exists = bool(branches.between(j, i))
    else:
        exists = any(b[0] == j and b[-1] == i for b in branches)
    return i if exists else None


def _uses_edge(seq: tuple[int, ...], i: int, j: int) -> bool:
    return any(a == i and b == j for a, b in zip(seq, seq[1:]))


class UpdateSession:
    """Single-writer update of a stored state; readers keep the old snapshot.

    Steps 1-4 run per operation via :meth:`apply`; steps 5-6 run once via
    :meth:`refresh`; :meth:`commit` returns the new state and the cost
    report.  Any error leaves the base state untouched.
    """

    def __init__(self, state: StoredState):
        self._base = state
        self._ed = _Editor(state.graph)
        self._S = set(state.structural.members)
        self._branches = {b.vertices for b in state.branches.branches}
        self._ext = state.extended.entries.copy()
        self._touched = 0
        self._wops = 0
        self._p = 0
        self._fallback = False
        self._graph2: WeightedDigraph | None = None
        self._structural2: StructuralSet | None = None
        self._reduced: np.ndarray | None = None
        self._full: np.ndarray | None = None
        self._converged = True
        self._ell_used = 0

    # -- steps 1-4 ------------------------------------------------------

    def _prod(self, seq: tuple[int, ...]) -> float:
        w = 1.0
        for a, b in zip(seq, seq[1:]):
            w *= self._ed.w[(a, b)]
        self._wops += len(seq) - 1
        return w

    def _subtract(self, seqs) -> None:
        for b in seqs:
            self._ext[b[0] - 1, b[-1] - 1] -= self._prod(b)

    def _add(self, seqs) -> None:
        for b in seqs:
            self._ext[b[0] - 1, b[-1] - 1] += self._prod(b)

    def _concatenations(self, i: int, j: int, survivors: set) -> set:
        """New branches created by edge (i, j): prefix + edge + suffix splices.

        A nonempty prefix (ending at i) or suffix (starting at j) is allowed
        only when that endpoint stays outside the structural set; candidates
        with a repeated vertex other than a first-equals-last closure are
        dropped.
        """
        prefixes: list[tuple[int, ...]] = [()]
        if i not in self._S:
            prefixes += [b for b in survivors if b[-1] == i]
        suffixes: list[tuple[int, ...]] = [()]
        if j not in self._S:
            suffixes += [b for b in survivors if b[0] == j]
        out = set()
        for b1 in prefixes:
            head = b1 if b1 else (i,)
            for b2 in suffixes:
                seq = head + (j,) + (b2[1:] if b2 else ())
                body = seq[:-1]
                if len(set(body)) != len(body):
                    continue
                if seq[-1] in body and seq[-1] != seq[0]:
                    continue
                out.add(seq)
        return out

    def _op_add_edge(self, op: DeltaOp) -> None:
        i, j = op.i, op.j
        if not self._ed.active(i) or not self._ed.active(j):
            raise DeltaError(f"add_edge({i},{j}) references an inactive vertex")
        if (i, j) in self._ed.w:
            raise DeltaError(f"edge ({i},{j}) already exists")
        promoted = promotion_rule(self._S, self._branches, i, j)
        removed = set()
        if promoted is not None:
            removed = {b for b in self._branches if promoted in b[1:-1]}
        survivors = self._branches - removed
        repriced = {b for b in survivors if j in b[1:]}
        self._subtract(removed | repriced)
        self._ed.add_edge(i, j, op.w)
        if promoted is not None:
            self._S.add(promoted)
        added = self._concatenations(i, j, survivors)
        self._branches = survivors | added
        self._add(repriced | added)
        self._touched += len(removed) + len(repriced) + len(added)

    def _op_remove_edge(self, op: DeltaOp) -> None:
        i, j = op.i, op.j
        if (i, j) not in self._ed.w:
            raise DeltaError(f"edge ({i},{j}) does not exist")
        removed = {b for b in self._branches if _uses_edge(b, i, j)}
        survivors = self._branches - removed
        repriced = {b for b in survivors if j in b[1:]}
        self._subtract(removed | repriced)
        self._ed.remove_edge(i, j)
        self._branches = survivors
        self._add(repriced)
        self._touched += len(removed) + len(repriced)

    def _op_add_vertex(self) -> None:
        self._ed.add_vertex()
        self._ext = np.pad(self._ext, ((0, 1), (0, 1)))

    def _op_remove_vertex(self, op: DeltaOp) -> None:
        v = op.v
        if not self._ed.active(v):
            raise DeltaError(f"remove_vertex({v}) references an inactive vertex")
        if v in self._S and len(self._S) == 1:
            raise DeltaError(f"removing {v} would empty the structural set")
        removed = {b for b in self._branches if v in b}
        survivors = self._branches - removed
        cols = set(self._ed.out[v])
        repriced = {b for b in survivors if any(y in b[1:] for y in cols)}
        self._subtract(removed | repriced)
        self._ed.remove_vertex(v)
        self._S.discard(v)
        self._branches = survivors
        self._add(repriced)
        self._touched += len(removed) + len(repriced)

    def apply(self, delta: GraphDelta, *, max_ops: int | None = None,
              assume_primitive: bool = False) -> None:
        """Run steps 1-4 for every operation, then re-validate the result."""
        if self._graph2 is not None:
            raise RuntimeError("session already applied a delta")
        if max_ops is not None and delta.size > max_ops:
            raise DeltaError(f"delta has {delta.size} ops, limit is {max_ops}")
        self._p = delta.size
        for op in delta.ops:
            if op.kind == "add_edge":
                self._op_add_edge(op)
            elif op.kind == "remove_edge":
                self._op_remove_edge(op)
            elif op.kind == "add_vertex":
                self._op_add_vertex()
            else:
                self._op_remove_vertex(op)
        try:
            g2 = self._ed.graph()
        except NonStochasticError as exc:
            raise DeltaError(f"delta leaves the graph non-stochastic: {exc}") from exc
        if not self._S:
            raise DeltaError("delta emptied the structural set")
        if not assume_primitive:
            mat, _ = g2.active_matrix()
            if not is_primitive(mat):
                raise DeltaError("delta breaks primitivity of the adjacency matrix")
        ok = validate_structural(g2, self._S, 1.0)
        if ok:
            ss = compute_depths(g2, self._S, 1.0)
        else:
            self._fallback = True
            ss = find_structural_set(g2, 1.0)
            self._S = set(ss.members)
            fresh = enumerate_branches(g2, ss)
            self._branches = {b.vertices for b in fresh.branches}
            self._ext = extended_reduced_matrix(g2, ss, branches=fresh).entries.copy()
        self._graph2 = g2
        self._structural2 = ss

    # -- steps 5-6 ------------------------------------------------------

    def refresh(self, ell: int = 200, tol: float = 1e-13) -> None:
        """Recompute the reduced dominant eigenvector and lift it (steps 5-6)."""
        if self._graph2 is None:
            raise RuntimeError("apply a delta before refreshing eigenvectors")
        members = self._structural2.members
        idx = [v - 1 for v in members]
        block = self._ext[np.ix_(idx, idx)]
        prev = self._base.full_vector
        init = np.array([prev[v - 1] if v - 1 < prev.shape[0] else 0.0 for v in members])
        if init.sum() <= 0:
            init = None
        pair = power_iteration(block, ell, tol, assume_primitive=True,
                               lazy=True, init=init)
        self._reduced = pair.vector
        self._converged = pair.converged
        self._full = _lift_full(self._graph2, self._structural2, pair.vector)
        self._ell_used = ell

    # -- commit ----------------------------------------------------------

    def commit(self, *, meas_ratio: float = 0.1) -> tuple[StoredState, CostReport]:
        if self._graph2 is None or self._reduced is None:
            raise RuntimeError("apply and refresh before committing")
        branchset = BranchSet(tuple(Branch(b) for b in self._branches))
        ext = ExtendedReducedMatrix(self._graph2.n_vertices,
                                    self._structural2.members, self._ext.copy())
        state = StoredState(self._graph2, self._structural2, branchset, ext,
                            self._reduced, self._full, self._converged)
        report = self._report(meas_ratio)
        return state, report

    def _report(self, meas_ratio: float) -> CostReport:
        base = self._base
        s_old = len(base.structural.members)
        k_old = base.structural.max_depth
        m_old = base.branches.m_statistic
        s_new = len(self._structural2.members)
        k_new = self._structural2.max_depth
        counts = self._structural2.depth_counts()
        step6 = float(sum(j * counts[j - 1] * (counts[j] - counts[j - 1])
                          for j in range(1, len(counts))))
        patch = float(self._p * (k_old + 1) * m_old)
        return CostReport(
            n=self._graph2.n_active, s=s_old, s_new=s_new, k=k_old, k_new=k_new,
            m=m_old, ell=self._ell_used, p=self._p,
            step3_cost=patch, step4_cost=patch,
            step5_cost=float(self._ell_used) * s_new ** 3, step6_cost=step6,
            touched_branches=self._touched, weight_updates=self._wops,
            structural_fallback=self._fallback, meas_ratio=meas_ratio)


def run_update(state: StoredState, delta: GraphDelta, *, ell: int = 200,
               tol: float = 1e-13, meas_ratio: float = 0.1,
               max_ops: int | None = None,
               assume_primitive: bool = False) -> tuple[StoredState, CostReport]:
    """Apply a delta end to end and return the new state with its cost report."""
    session = UpdateSession(state)
    session.apply(delta, max_ops=max_ops, assume_primitive=assume_primitive)
    session.refresh(ell, tol)
    return session.commit(meas_ratio=meas_ratio)
