"""File formats: graphs (edge list and JSON), deltas, state directories, reports.

Edge-list format: a header line ``N <count>`` followed by one edge per line,
``i j re [im]``.  The JSON alternative is ``{"n": ..., "edges": [[i, j, re,
im], ...]}`` with optional ``stochastic`` and ``removed`` keys.  All modules
share these formats.
"""

from __future__ import annotations

import json
import os
from typing import Iterable

import numpy as np

from .exceptions import GraphFormatError
from .graph import WeightedDigraph, compute_depths
from .reduction import Branch, BranchSet, ExtendedReducedMatrix
from .update import DeltaOp, GraphDelta, StoredState


def _edge_weight(re: float, im: float):
    return complex(re, im) if im else float(re)


def parse_edgelist(text: str) -> tuple[int, dict]:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphFormatError("empty graph file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "N":
        raise GraphFormatError(f"expected header 'N <count>', got {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError as exc:
        raise GraphFormatError(f"bad vertex count {head[1]!r}") from exc
    weights = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) not in (3, 4):
            raise GraphFormatError(f"expected 'i j re [im]', got {ln!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            re = float(parts[2])
            im = float(parts[3]) if len(parts) == 4 else 0.0
        except ValueError as exc:
            raise GraphFormatError(f"bad edge line {ln!r}") from exc
        if (i, j) in weights:
            raise GraphFormatError(f"duplicate edge ({i},{j})")
        weights[(i, j)] = _edge_weight(re, im)
    return n, weights


def render_edgelist(graph: WeightedDigraph) -> str:
    lines = [f"N {graph.n_vertices}"]
    for (i, j) in graph.edges():
        w = complex(graph.weight(i, j))
        if w.imag:
            lines.append(f"{i} {j} {w.real!r} {w.imag!r}")
        else:
            lines.append(f"{i} {j} {w.real!r}")
    return "\n".join(lines) + "\n"


def graph_to_dict(graph: WeightedDigraph) -> dict:
    edges = []
    for (i, j) in graph.edges():
        w = complex(graph.weight(i, j))
        edges.append([i, j, w.real, w.imag])
    out = {"n": graph.n_vertices, "edges": edges}
    if graph.stochastic:
        out["stochastic"] = True
    if graph.removed:
        out["removed"] = sorted(graph.removed)
    return out


def graph_from_dict(data: dict, *, stochastic: bool | None = None) -> WeightedDigraph:
    try:
        n = int(data["n"])
        raw = data["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad graph object: {exc}") from exc
    weights = {}
    for entry in raw:
        if len(entry) not in (3, 4):
            raise GraphFormatError(f"bad edge entry {entry!r}")
        i, j = int(entry[0]), int(entry[1])
        re = float(entry[2])
        im = float(entry[3]) if len(entry) == 4 else 0.0
        if (i, j) in weights:
            raise GraphFormatError(f"duplicate edge ({i},{j})")
        weights[(i, j)] = _edge_weight(re, im)
    flag = bool(data.get("stochastic", False)) if stochastic is None else stochastic
    removed = frozenset(int(v) for v in data.get("removed", ()))
    return WeightedDigraph(n, weights, stochastic=flag, removed=removed)


def read_graph(path: str, *, stochastic: bool | None = None) -> WeightedDigraph:
    """Load a graph from an edge-list or JSON file (by extension)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        if path.endswith(".json"):
            return graph_from_dict(json.loads(text), stochastic=stochastic)
        n, weights = parse_edgelist(text)
        return WeightedDigraph(n, weights, stochastic=bool(stochastic))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: invalid JSON: {exc}") from exc
    except ValueError as exc:
        raise GraphFormatError(f"{path}: {exc}") from exc


def write_graph(graph: WeightedDigraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if path.endswith(".json"):
            fh.write(dumps(graph_to_dict(graph)))
        else:
            fh.write(render_edgelist(graph))


def delta_to_dict(delta: GraphDelta) -> dict:
    ops = []
    for op in delta.ops:
        if op.kind == "add_edge":
            ops.append({"op": "add_edge", "i": op.i, "j": op.j, "w": op.w})
        elif op.kind == "remove_edge":
            ops.append({"op": "remove_edge", "i": op.i, "j": op.j})
        elif op.kind == "add_vertex":
            ops.append({"op": "add_vertex"})
        else:
            ops.append({"op": "remove_vertex", "v": op.v})
    return {"ops": ops}


def delta_from_dict(data) -> GraphDelta:
    raw = data["ops"] if isinstance(data, dict) else data
    ops = []
    try:
        for entry in raw:
            kind = entry["op"]
            if kind == "add_edge":
                ops.append(DeltaOp.add_edge(int(entry["i"]), int(entry["j"]),
                                            float(entry["w"])))
            elif kind == "remove_edge":
                ops.append(DeltaOp.remove_edge(int(entry["i"]), int(entry["j"])))
            elif kind == "add_vertex":
                ops.append(DeltaOp.add_vertex())
            elif kind == "remove_vertex":
                ops.append(DeltaOp.remove_vertex(int(entry["v"])))
            else:
                raise GraphFormatError(f"unknown delta op {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad delta object: {exc}") from exc
    return GraphDelta(tuple(ops))


def read_delta(path: str) -> GraphDelta:
    with open(path, encoding="utf-8") as fh:
        try:
            return delta_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: invalid JSON: {exc}") from exc


def write_delta(delta: GraphDelta, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(delta_to_dict(delta)))


def vector_to_dict(vertices: Iterable[int], values, normalization: str,
                   lam: complex | None = None) -> dict:
    vals = [[complex(v).real, complex(v).imag] for v in np.asarray(values).ravel()]
    out = {"vertices": list(vertices), "values": vals, "normalization": normalization}
    if lam is not None:
        out["lambda"] = [complex(lam).real, complex(lam).imag]
    return out


def vector_from_dict(data: dict) -> tuple[list[int], np.ndarray, str, complex | None]:
    try:
        vertices = [int(v) for v in data["vertices"]]
        values = np.array([complex(a, b) for a, b in data["values"]])
        norm = data.get("normalization", "none")
        lam = None
        if "lambda" in data:
            lam = complex(data["lambda"][0], data["lambda"][1])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise GraphFormatError(f"bad vector object: {exc}") from exc
    return vertices, values, norm, lam


def read_vector(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return vector_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: invalid JSON: {exc}") from exc


def branches_to_dict(branches: BranchSet) -> dict:
    return {"branches": branches.sequences()}


def branches_from_dict(data: dict) -> BranchSet:
    try:
        return BranchSet(tuple(Branch(tuple(int(v) for v in seq))
                               for seq in data["branches"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad branch manifest: {exc}") from exc


def save_state(state: StoredState, dirpath: str) -> None:
    """Persist a stored state as a directory of JSON artifacts."""
    os.makedirs(dirpath, exist_ok=True)
    def put(name, obj):
        with open(os.path.join(dirpath, name), "w", encoding="utf-8") as fh:
            fh.write(dumps(obj))
    put("graph.json", graph_to_dict(state.graph))
    put("structural.json", {"members": list(state.structural.members),
                            "lambda": [complex(state.structural.lam).real,
                                       complex(state.structural.lam).imag]})
    put("branches.json", branches_to_dict(state.branches))
    put("extended.json", {"n": state.extended.n_vertices,
                          "members": list(state.extended.members),
                          "rows": state.extended.entries.tolist()})
    put("reduced_vector.json", vector_to_dict(state.structural.members,
                                              state.reduced_vector, "L1-positive", 1.0))
    put("full_vector.json", {"n": state.graph.n_vertices,
                             "values": state.full_vector.tolist(),
                             "normalization": "L1-positive"})
    put("meta.json", {"eig_converged": state.eig_converged})


def load_state(dirpath: str) -> StoredState:
    def get(name):
        p = os.path.join(dirpath, name)
        try:
            with open(p, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError as exc:
            raise GraphFormatError(f"state directory misses {name}") from exc
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{p}: invalid JSON: {exc}") from exc
    graph = graph_from_dict(get("graph.json"))
    sdata = get("structural.json")
    lam = complex(sdata["lambda"][0], sdata["lambda"][1])
    structural = compute_depths(graph, [int(v) for v in sdata["members"]], lam)
    branches = branches_from_dict(get("branches.json"))
    edata = get("extended.json")
    extended = ExtendedReducedMatrix(int(edata["n"]),
                                     tuple(int(v) for v in edata["members"]),
                                     np.array(edata["rows"], dtype=float))
    _, reduced, _, _ = vector_from_dict(get("reduced_vector.json"))
    fdata = get("full_vector.json")
    full = np.array(fdata["values"], dtype=float)
    meta = get("meta.json")
    return StoredState(graph, structural, branches, extended, reduced.real, full,
                       bool(meta.get("eig_converged", True)))


def dumps(obj) -> str:
    """Deterministic JSON rendering used for every report and artifact."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def render_table(obj, indent: int = 0) -> str:
    """Plain-text rendering of a nested report dictionary."""
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key in obj:
            val = obj[key]
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.append(render_table(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {val}")
    elif isinstance(obj, list):
        for t, val in enumerate(obj):
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}[{t}]")
                lines.append(render_table(val, indent + 1))
            else:
                lines.append(f"{pad}- {val}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)
