"""Finite symmetric directed graphs with arc weights and 1-forms.

Every unoriented edge is stored as a pair of mutually inverse arcs, kept
consecutive in insertion order: edge ``i`` owns arcs ``2i`` (forward) and
``2i + 1`` (backward).  A loop also contributes two distinct, mutually
inverse arcs, so arc inversion is always a fixed-point-free involution.
The arc index range 0..|D|-1 is the canonical basis ordering of the arc
space used by every operator built on top of a graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GraphStructureError
from .report import Checker, ValidationReport

# Per-vertex slack allowed in sum_{o(e)=v} |w(e)|^2 = 1, scaled by deg(v).
WEIGHT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Arc:
    id: int
    origin: int      # vertex index
    terminal: int    # vertex index
    inverse: int     # arc id of the reversed arc


@dataclass(frozen=True)
class Graph:
    """Symmetric digraph; vertices are labels, arcs carry vertex indices."""

    vertices: tuple[str, ...]
    arcs: tuple[Arc, ...]

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    @cached_property
    def origins(self) -> np.ndarray:
        return np.array([a.origin for a in self.arcs], dtype=np.intp)

    @cached_property
    def terminals(self) -> np.ndarray:
        return np.array([a.terminal for a in self.arcs], dtype=np.intp)

    @cached_property
    def inversion(self) -> np.ndarray:
        return np.array([a.inverse for a in self.arcs], dtype=np.intp)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Out-degree per vertex; equals in-degree by symmetry."""
        return np.bincount(self.origins, minlength=self.num_vertices)

    def degree(self, vertex: int | str) -> int:
        return int(self.degrees[self.vertex_index(vertex)])

    def vertex_index(self, vertex: int | str) -> int:
        if isinstance(vertex, str):
            try:
                return self.vertices.index(vertex)
            except ValueError:
                raise GraphStructureError(f"unknown vertex {vertex!r}") from None
        return int(vertex)


def arc_name(arc_id: int) -> str:
    """Serialized arc id: ``edgeIndex:f`` for forward, ``edgeIndex:b`` for backward."""
    return f"{arc_id // 2}:{'f' if arc_id % 2 == 0 else 'b'}"


def arc_id_from_name(name: str) -> int:
    edge, _, side = name.partition(":")
    if side not in ("f", "b"):
        raise GraphStructureError(f"bad arc id {name!r}")
    return 2 * int(edge) + (0 if side == "f" else 1)


def from_edge_list(vertices: Sequence[str], edges: Iterable[tuple[str, str]]) -> Graph:
    """Build a graph from labeled vertices plus unoriented edges.

    Multi-edges and loops are allowed; every vertex must be hit by at
    least one edge endpoint (isolated vertices are rejected).
    """
    labels = tuple(str(v) for v in vertices)
    if len(set(labels)) != len(labels):
        raise GraphStructureError("duplicate vertex labels")
    index = {v: i for i, v in enumerate(labels)}
    arcs: list[Arc] = []
    for u, v in edges:
        if u not in index or v not in index:
            raise GraphStructureError(f"edge ({u!r}, {v!r}) references an unknown vertex")
        k = len(arcs)
        arcs.append(Arc(k, index[u], index[v], k + 1))
        arcs.append(Arc(k + 1, index[v], index[u], k))
    g = Graph(labels, tuple(arcs))
    touched = set(g.origins.tolist())
    missing = [labels[i] for i in range(len(labels)) if i not in touched]
    if missing:
        raise GraphStructureError(f"isolated vertices {missing}; every vertex needs degree >= 1")
    return g


def cycle(n: int) -> Graph:
    if n < 3:
        raise DomainError(f"cycle needs n >= 3, got {n}")
    labels = [str(i) for i in range(n)]
    return from_edge_list(labels, [(labels[i], labels[(i + 1) % n]) for i in range(n)])


def complete(n: int) -> Graph:
    if n < 2:
        raise DomainError(f"complete graph needs n >= 2, got {n}")
    labels = [str(i) for i in range(n)]
    return from_edge_list(labels, [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n)])


def path_with_loops(n: int) -> Graph:
    """Path on n vertices with one loop attached at each endpoint.

    For n = 1 the two endpoints coincide and a single loop is attached.
    """
    if n < 1:
        raise DomainError(f"path needs n >= 1, got {n}")
    labels = [str(i) for i in range(n)]
    edges = [(labels[i], labels[i + 1]) for i in range(n - 1)]
    edges.append((labels[0], labels[0]))
    if n > 1:
        edges.append((labels[-1], labels[-1]))
    return from_edge_list(labels, edges)


def single_edge() -> Graph:
    return from_edge_list(["u", "v"], [("u", "v")])


def grover_weight(graph: Graph) -> np.ndarray:
    """Weight w(e) = 1/sqrt(deg(o(e))), the uniform-coin normalization."""
    return (1.0 / np.sqrt(graph.degrees[graph.origins])).astype(np.complex128)


def one_form_from_edge_values(graph: Graph, edge_values: Sequence[float]) -> np.ndarray:
    """Expand one real value per unoriented edge into an antisymmetric 1-form.

    The forward arc of edge i gets edge_values[i], the backward arc its
    exact negation, so theta(reversed) == -theta(arc) holds bit for bit.
    """
    values = np.asarray(edge_values, dtype=np.float64)
    if values.shape != (graph.num_arcs // 2,):
        raise DomainError(f"expected one value per edge ({graph.num_arcs // 2}), got shape {values.shape}")
    theta = np.empty(graph.num_arcs, dtype=np.float64)
    theta[0::2] = values
    theta[1::2] = -values
    return theta


def zero_one_form(graph: Graph) -> np.ndarray:
    return np.zeros(graph.num_arcs, dtype=np.float64)


def validate_structures(
    graph: Graph,
    weight: np.ndarray | None = None,
    one_form: np.ndarray | None = None,
) -> ValidationReport:
    """Check every structural invariant; violations are reported, never raised."""
    chk = Checker()
    inv = graph.inversion
    for pos, a in enumerate(graph.arcs):
        loc = f"arc {a.id}"
        chk.expect(a.id == pos, "arc-id-contiguous", loc, float(a.id - pos))
        chk.expect(0 <= a.inverse < graph.num_arcs, "inversion-range", loc, float(a.inverse))
        if not (0 <= a.inverse < graph.num_arcs):
            continue
        b = graph.arcs[a.inverse]
        chk.expect(b.inverse == a.id, "inversion-involution", loc, float(abs(b.inverse - a.id)))
        chk.expect(a.inverse != a.id, "inversion-fixed-point", loc, 1.0)
        chk.expect(b.origin == a.terminal and b.terminal == a.origin, "inversion-orientation", loc, 1.0)
    for i, d in enumerate(graph.degrees):
        chk.expect(d >= 1, "min-degree", f"vertex {graph.vertices[i]}", float(d))

    if weight is not None:
        w = np.asarray(weight)
        zero = np.flatnonzero(np.abs(w) == 0.0)
        for a in zero:
            chk.expect(False, "weight-nonzero", f"arc {a}", 0.0)
        sums = np.bincount(graph.origins, weights=np.abs(w) ** 2, minlength=graph.num_vertices)
        for i, s in enumerate(sums):
            tol = WEIGHT_NORM_TOL * max(int(graph.degrees[i]), 1)
            chk.expect_small(abs(s - 1.0), tol, "weight-normalization", f"vertex {graph.vertices[i]}")

    if one_form is not None:
        theta = np.asarray(one_form, dtype=np.float64)
        defect = theta + theta[inv]
        for a in np.flatnonzero(defect != 0.0):
            chk.expect(False, "one-form-antisymmetry", f"arc {a}", float(abs(defect[a])))

    return chk.close()


def graph_to_json(
    graph: Graph,
    weight: np.ndarray | None = None,
    one_form: np.ndarray | None = None,
) -> dict:
    """Serialize to the interchange schema (vertices, edges, optional weights/one_form)."""
    edges = [
        {"u": graph.vertices[graph.arcs[2 * i].origin], "v": graph.vertices[graph.arcs[2 * i].terminal]}
        for i in range(graph.num_arcs // 2)
    ]
    data: dict = {"vertices": list(graph.vertices), "edges": edges}
    if weight is not None:
        w = np.asarray(weight, dtype=np.complex128)
        data["weights"] = {arc_name(a): [float(w[a].real), float(w[a].imag)] for a in range(graph.num_arcs)}
    if one_form is not None:
        theta = np.asarray(one_form, dtype=np.float64)
        data["one_form"] = {str(i): float(theta[2 * i]) for i in range(graph.num_arcs // 2)}
    return data


def graph_from_json(data: dict) -> tuple[Graph, np.ndarray | None, np.ndarray | None]:
    try:
        vertices = data["vertices"]
        edges = [(e["u"], e["v"]) for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphStructureError(f"graph JSON missing field: {exc}") from exc
    graph = from_edge_list(vertices, edges)
    weight = None
    if "weights" in data:
        weight = np.zeros(graph.num_arcs, dtype=np.complex128)
        for name, (re, im) in data["weights"].items():
            weight[arc_id_from_name(name)] = complex(re, im)
    one_form = None
    if "one_form" in data:
        values = np.zeros(graph.num_arcs // 2, dtype=np.float64)
        for key, val in data["one_form"].items():
            values[int(key)] = float(val)
        one_form = one_form_from_edge_values(graph, values)
    return graph, weight, one_form


def load_graph_file(path: str) -> tuple[Graph, np.ndarray | None, np.ndarray | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_json(json.load(fh))
