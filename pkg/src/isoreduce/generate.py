"""Random sparse stochastic graphs and random deltas for experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DeltaError, GenerationError, NotPrimitiveError
from .graph import WeightedDigraph
from .spectral import is_primitive
from .update import DeltaOp, GraphDelta, StoredState, apply_ops


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs for the cost experiment: graph size, sparsity, delta size, trials."""

    n: int
    avg_degree: float
    p: int
    ell: int
    trials: int
    seed: int
    ratio: float = 0.1

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need at least 3 vertices")
        if self.avg_degree < 1:
            raise ValueError("average degree must be at least 1")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.p < 0:
            raise ValueError("delta size must be non-negative")
        if self.ell < 1:
            raise ValueError("iteration cap must be positive")
        if not 0 < self.ratio <= 1:
            raise ValueError("ratio must lie in (0, 1]")


def check_assumptions(graph: WeightedDigraph) -> None:
    """Validate the update-algorithm prerequisites on a graph.

    Stochasticity (real weights, unit columns, no loops) is enforced by the
    graph's own flag; this adds the primitivity requirement.

    Raises:
        NonStochasticError, NotPrimitiveError.
    """
    WeightedDigraph(graph.n_vertices, dict(graph.weights), stochastic=True,
                    removed=graph.removed)
    mat, _ = graph.active_matrix()
    if not is_primitive(mat):
        raise NotPrimitiveError("adjacency matrix is not primitive")


def random_stochastic_graph(n: int, avg_degree: float, rng: np.random.Generator, *,
                            max_tries: int = 200) -> WeightedDigraph:
    """Loop-free primitive stochastic graph with expected out-degree ``avg_degree``.

    Edges are sampled independently, empty columns are patched with one
    random in-edge, column weights are normalized to unit sum, and
    non-primitive draws are rejected and resampled.

    Raises:
        GenerationError: no primitive draw within ``max_tries``.
    """
    if n < 2:
        raise ValueError("need at least 2 vertices")
    q = min(1.0, avg_degree / (n - 1))
    for _ in range(max_tries):
        mask = rng.random((n, n)) < q
        np.fill_diagonal(mask, False)
        for j in range(n):
            if not mask[:, j].any():
                i = int(rng.integers(0, n - 1))
                if i >= j:
                    i += 1
                mask[i, j] = True
        w = rng.uniform(0.05, 1.0, (n, n)) * mask
        if not is_primitive(w):
            continue
        w = w / w.sum(axis=0, keepdims=True)
        return WeightedDigraph.from_matrix(w, stochastic=True)
    raise GenerationError(
        f"no primitive graph with n={n}, degree={avg_degree} in {max_tries} tries")


def _op_stays_valid(graph: WeightedDigraph, ops: list[DeltaOp]) -> WeightedDigraph | None:
    """Apply candidate ops to a scratch copy; None when invalid or non-primitive."""
    try:
        g2 = apply_ops(graph, GraphDelta(tuple(ops)))
    except DeltaError:
        return None
    mat, _ = g2.active_matrix()
    if not is_primitive(mat):
        return None
    return g2


def random_delta(graph: WeightedDigraph, rng: np.random.Generator, p: int, *,
                 max_tries: int = 300) -> GraphDelta:
    """Sample a valid delta of exactly ``p`` operations for ``graph``.

    Mixes edge additions/removals with vertex additions (a new vertex plus
    one in- and one out-edge, three slots) and vertex removals; candidates
    that would break stochasticity or primitivity are resampled.

    Raises:
        GenerationError: not enough valid operations found.
    """
    ops: list[DeltaOp] = []
    working = graph
    tries = 0
    while len(ops) < p:
        tries += 1
        if tries > max_tries:
            raise GenerationError(f"could not assemble a {p}-op delta")
        slots = p - len(ops)
        r = rng.random()
        vertices = working.vertices()
        candidate: list[DeltaOp] = []
        if r < 0.15 and slots >= 3 and len(vertices) >= 2:
            new_id = working.n_vertices + 1
            src = int(rng.choice(vertices))
            dst = int(rng.choice([v for v in vertices if v != src]))
            candidate = [DeltaOp.add_vertex(),
                         DeltaOp.add_edge(src, new_id, float(rng.uniform(0.2, 1.0))),
                         DeltaOp.add_edge(new_id, dst, float(rng.uniform(0.2, 1.0)))]
        elif r < 0.30 and len(vertices) > 3:
            candidate = [DeltaOp.remove_vertex(int(rng.choice(vertices)))]
        elif r < 0.60 and working.edges():
            i, j = map(int, working.edges()[int(rng.integers(0, len(working.edges())))])
            candidate = [DeltaOp.remove_edge(i, j)]
        else:
            i = int(rng.choice(vertices))
            j = int(rng.choice(vertices))
            if i == j or working.has_edge(i, j):
                continue
            candidate = [DeltaOp.add_edge(i, j, float(rng.uniform(0.2, 1.0)))]
        g2 = _op_stays_valid(working, candidate)
        if g2 is None:
            continue
        ops.extend(candidate)
        working = g2
    return GraphDelta(tuple(ops))


def promotion_candidates(state: StoredState) -> list[tuple[int, int]]:
    """Edges (i, j) whose insertion fires the structural promotion rule.

    Scans stored branches for complement-to-complement connections j -> i
    where the edge (i, j) is still absent.
    """
    members = set(state.structural.members)
    g = state.graph
    out = []
    seen = set()
    for b in state.branches.branches:
        j, i = b.start, b.end
        if i in members or j in members or i == j:
            continue
        if g.has_edge(i, j) or (i, j) in seen:
            continue
        seen.add((i, j))
        out.append((i, j))
    return sorted(out)
