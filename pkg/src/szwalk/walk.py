"""Assembly of abstract Szegedy-type evolutions.

A walk instance bundles a coisometry (the boundary operator, mapping the
walk space onto the vertex-like space), a unitary involution (the shift),
and everything derived from them: the coin 2 d*d - 1, the evolution
U = shift . coin, and the Hermitian discriminant d S d* whose spectrum in
[-1, 1] controls the spectrum of U.  Instances may come from graph data or
from arbitrary abstract operator pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DimensionError, DomainError
from .graphs import Graph, graph_from_json, graph_to_json, validate_structures
from .linalg import hermitian_eig, operator_from_json, operator_to_json
from .report import Checker, ValidationReport

# Construction-quality bounds (per unit dimension) for assembled instances.
BUILD_TOL = 1e-11
UNITARY_TOL = 1e-10
# assemble_walk rejects inputs whose coisometry/involution defect exceeds this.
ACCEPT_TOL = 1e-9


@dataclass(frozen=True)
class WalkInstance:
    boundary: np.ndarray       # coisometry, shape (dim_k, dim_h)
    shift: np.ndarray          # unitary involution on the walk space
    coin: np.ndarray           # 2 boundary* boundary - 1
    evolution: np.ndarray      # shift @ coin
    discriminant: np.ndarray   # boundary @ shift @ boundary*
    graph: Graph | None = None

    @property
    def dim_h(self) -> int:
        return self.shift.shape[0]

    @property
    def dim_k(self) -> int:
        return self.boundary.shape[0]

    @property
    def shifted_boundary(self) -> np.ndarray:
        """The second coisometry boundary . shift (never stored, always derived)."""
        return self.boundary @ self.shift


def boundary_operator(graph: Graph, weight: np.ndarray) -> np.ndarray:
    """Matrix of psi -> (v -> sum over arcs leaving v of psi(e) conj(w(e)))."""
    report = validate_structures(graph, weight=weight)
    if not report.passed:
        raise DomainError(f"weight fails validation: {report.summary()}")
    op = np.zeros((graph.num_vertices, graph.num_arcs), dtype=np.complex128)
    op[graph.origins, np.arange(graph.num_arcs)] = np.conj(np.asarray(weight, dtype=np.complex128))
    return op


def shift_operator(graph: Graph, one_form: np.ndarray | None = None) -> np.ndarray:
    """Twisted arc reversal: (S psi)(e) = exp(-i theta(e)) psi(reversed e)."""
    if one_form is None:
        one_form = np.zeros(graph.num_arcs, dtype=np.float64)
    report = validate_structures(graph, one_form=one_form)
    if not report.passed:
        raise DomainError(f"1-form fails validation: {report.summary()}")
    op = np.zeros((graph.num_arcs, graph.num_arcs), dtype=np.complex128)
    arcs = np.arange(graph.num_arcs)
    op[arcs, graph.inversion] = np.exp(-1j * np.asarray(one_form, dtype=np.float64))
    return op


def assemble_walk(boundary: np.ndarray, shift: np.ndarray, graph: Graph | None = None) -> WalkInstance:
    """Build the full operator family from a coisometry/involution pair.

    Inputs are checked, not trusted: the coisometry and involution defects
    must stay below 1e-9 per unit dimension or assembly is refused.
    """
    boundary = np.asarray(boundary, dtype=np.complex128)
    shift = np.asarray(shift, dtype=np.complex128)
    dim_k, dim_h = boundary.shape
    if shift.shape != (dim_h, dim_h):
        raise DimensionError(f"shift shape {shift.shape} incompatible with boundary {boundary.shape}")
    if dim_k > dim_h:
        raise DimensionError(f"target dimension {dim_k} exceeds walk dimension {dim_h}")

    cois = np.linalg.norm(boundary @ boundary.conj().T - np.eye(dim_k))
    if cois > ACCEPT_TOL * dim_k:
        raise DomainError(f"boundary is not a coisometry: ||d d* - I|| = {cois:.3e}")
    herm = np.linalg.norm(shift - shift.conj().T)
    invol = np.linalg.norm(shift @ shift - np.eye(dim_h))
    if herm > ACCEPT_TOL * dim_h or invol > ACCEPT_TOL * dim_h:
        raise DomainError(
            f"shift is not a unitary involution: ||S - S*|| = {herm:.3e}, ||S^2 - I|| = {invol:.3e}")

    coin = 2.0 * (boundary.conj().T @ boundary) - np.eye(dim_h)
    evolution = shift @ coin
    discriminant = boundary @ shift @ boundary.conj().T
    return WalkInstance(boundary, shift, coin, evolution, discriminant, graph)


def szegedy_walk(graph: Graph, weight: np.ndarray | None = None,
                 one_form: np.ndarray | None = None) -> WalkInstance:
    """Twisted Szegedy walk on a graph; defaults to the Grover weight and flat 1-form."""
    from .graphs import grover_weight

    if weight is None:
        weight = grover_weight(graph)
    return assemble_walk(boundary_operator(graph, weight), shift_operator(graph, one_form), graph)


def grover_walk(graph: Graph) -> WalkInstance:
    return szegedy_walk(graph)


def random_instance(dim_h: int, dim_k: int, seed: int) -> WalkInstance:
    """Seeded random abstract instance for fuzzing.

    Uses numpy's default PCG64 generator: the boundary is the first dim_k
    rows of the phase-fixed QR orthonormalization of a complex Gaussian
    matrix, and the shift is V diag(+-1) V* for an independent random
    unitary V and random signs.  Identical seeds give identical matrices.
    """
    if not (1 <= dim_k <= dim_h):
        raise DimensionError(f"need 1 <= dim_k <= dim_h, got ({dim_h}, {dim_k})")
    rng = np.random.default_rng(seed)

    def haar_unitary(n: int) -> np.ndarray:
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        return q * (d / np.abs(d))

    boundary = haar_unitary(dim_h)[:dim_k, :]
    v = haar_unitary(dim_h)
    signs = rng.choice([-1.0, 1.0], size=dim_h)
    shift = (v * signs) @ v.conj().T
    return assemble_walk(boundary, shift)


def validate_instance(inst: WalkInstance) -> ValidationReport:
    """Check every operator identity a well-formed instance must satisfy."""
    chk = Checker()
    dim_h, dim_k = inst.dim_h, inst.dim_k
    d = inst.boundary
    db = inst.shifted_boundary
    s, c, u, t = inst.shift, inst.coin, inst.evolution, inst.discriminant

    chk.expect_small(np.linalg.norm(d @ d.conj().T - np.eye(dim_k)),
                     BUILD_TOL * dim_k, "coisometry")
    chk.expect_small(np.linalg.norm(s - s.conj().T), BUILD_TOL * dim_h, "shift-selfadjoint")
    chk.expect_small(np.linalg.norm(s @ s - np.eye(dim_h)), BUILD_TOL * dim_h, "shift-involution")
    chk.expect_small(np.linalg.norm(c - (2.0 * (d.conj().T @ d) - np.eye(dim_h))),
                     1e-12 * dim_h, "coin-construction")
    chk.expect_small(np.linalg.norm(u - s @ c), 1e-12 * dim_h, "evolution-construction")
    chk.expect_small(np.linalg.norm(u.conj().T @ u - np.eye(dim_h)),
                     UNITARY_TOL * dim_h, "evolution-unitary")
    chk.expect_small(np.linalg.norm(t - t.conj().T), BUILD_TOL * dim_k, "discriminant-hermitian")
    spectrum = hermitian_eig(t).eigenvalues
    chk.expect_small(max(float(np.max(np.abs(spectrum))) - 1.0, 0.0),
                     1e-9, "discriminant-contraction")
    chk.expect_small(np.linalg.norm(u @ d.conj().T - db.conj().T),
                     UNITARY_TOL * dim_h, "intertwine-boundary")
    chk.expect_small(np.linalg.norm(u @ db.conj().T - (2.0 * db.conj().T @ t - d.conj().T)),
                     UNITARY_TOL * dim_h, "intertwine-shifted-boundary")
    return chk.close()


def instance_to_json(inst: WalkInstance, include_derived: bool = True) -> dict[str, Any]:
    data: dict[str, Any] = {
        "dim_h": inst.dim_h,
        "dim_k": inst.dim_k,
        "boundary": operator_to_json(inst.boundary),
        "shift": operator_to_json(inst.shift),
    }
    if inst.graph is not None:
        data["graph"] = graph_to_json(inst.graph)
    if include_derived:
        data["coin"] = operator_to_json(inst.coin)
        data["evolution"] = operator_to_json(inst.evolution)
        data["discriminant"] = operator_to_json(inst.discriminant)
    return data


def instance_from_json(data: dict[str, Any]) -> WalkInstance:
    """Rebuild from boundary + shift; derived operators are recomputed, not trusted."""
    graph = graph_from_json(data["graph"])[0] if "graph" in data else None
    return assemble_walk(operator_from_json(data["boundary"]),
                         operator_from_json(data["shift"]), graph)


def dump_instance(inst: WalkInstance, path: str, include_derived: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_json(inst, include_derived), fh)
