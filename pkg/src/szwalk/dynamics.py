"""Walker dynamics over a partitioned state space.

A partition splits the basis 0..dim-1 into contiguous labeled blocks, one
per observation site.  Graph walks group arcs by origin vertex; since the
canonical arc ordering interleaves edge directions, measurement happens in
the origin-sorted basis, reached through an explicit permutation returned
alongside the partition.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import cluster_eigenvalues, hermitian_eig, apply_function
from .report import Checker, ValidationReport
from .walk import WalkInstance
from .generator import GeneratorDecomposition
from .spectral import SubspaceAtlas


@dataclass(frozen=True)
class Partition:
    """Contiguous labeled blocks covering the whole index range."""

    labels: tuple[str, ...]
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.sizes):
            raise DimensionError("labels and sizes differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError("duplicate partition labels")
        if any(s < 1 for s in self.sizes):
            raise DomainError("every partition block needs size >= 1")

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.intp)

    @property
    def dim(self) -> int:
        return int(sum(self.sizes))

    @property
    def num_blocks(self) -> int:
        return len(self.labels)

    def block(self, label: str) -> slice:
        i = self.index(label)
        return slice(int(self.offsets[i]), int(self.offsets[i] + self.sizes[i]))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown partition label {label!r}") from None

    def block_probabilities(self, state: np.ndarray) -> np.ndarray:
        return np.add.reduceat(np.abs(state) ** 2, self.offsets)


@dataclass(frozen=True)
class WalkTrace:
    """Time series of states, site distributions, and their Cesaro mean."""

    partition: Partition
    states: np.ndarray          # (steps + 1, dim)
    distributions: np.ndarray   # (steps + 1, num_blocks)
    cesaro: np.ndarray          # average of distributions over n = 0..steps-1
    limit: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    def with_limit(self, limit: np.ndarray) -> "WalkTrace":
        return replace(self, limit=np.asarray(limit, dtype=np.float64))


@dataclass(frozen=True)
class InferredDigraph:
    """Digraph read off the block pattern of a unitary: arc tail -> head
    whenever the (head, tail) block is nonzero."""

    vertices: tuple[str, ...]
    arcs: tuple[tuple[str, str], ...]

    @property
    def arc_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.arcs)

    def has_arc(self, tail: str, head: str) -> bool:
        return (tail, head) in self.arc_set


@dataclass(frozen=True)
class LocalizationReport:
    limit: dict[str, float]             # Cesaro limit distribution
    certified_bound: float              # max over sites; lower bound for max limsup
    overlap: float                      # squared norm of the point-spectral part of psi0
    point_spectrum_nonempty: bool
    has_correction_space: bool | None   # None when no atlas was supplied
    empirical_max: dict[str, float]     # per-site max of nu_n over the window
    window: tuple[int, int]

    @property
    def localized(self) -> bool:
        return self.certified_bound > 0.0


def origin_order(graph) -> np.ndarray:
    """Arc permutation sorting arcs by origin vertex (stable within a vertex)."""
    return np.argsort(graph.origins, kind="stable")


def origin_partition(graph) -> Partition:
    return Partition(tuple(graph.vertices), tuple(int(d) for d in graph.degrees))


def measured_evolution(inst: WalkInstance) -> tuple[np.ndarray, Partition, np.ndarray]:
    """Evolution in the origin-sorted arc basis plus the vertex partition.

    Returns (evolution, partition, order); position j of the new basis is
    arc order[j] of the canonical ordering.
    """
    if inst.graph is None:
        raise DomainError("instance carries no graph; supply a partition explicitly")
    order = origin_order(inst.graph)
    permuted = inst.evolution[np.ix_(order, order)]
    return permuted, origin_partition(inst.graph), order


def permute_state(state: np.ndarray, order: np.ndarray) -> np.ndarray:
    return np.asarray(state)[order]


def permute_generator(gen: GeneratorDecomposition, order: np.ndarray) -> GeneratorDecomposition:
    """Re-express a generator decomposition in a permuted basis (e.g. the
    origin-sorted measurement basis of a graph walk)."""
    from .linalg import Subspace

    def move(space):
        return Subspace(space.ambient_dim, space.basis[order])

    return replace(gen, matrix=gen.matrix[np.ix_(order, order)],
                   rotating_plus=move(gen.rotating_plus), rotating_minus=move(gen.rotating_minus),
                   fixed=move(gen.fixed), flipped=move(gen.flipped))


def arc_delta(graph, arc_id: int, order: np.ndarray | None = None) -> np.ndarray:
    """Point mass on one arc, optionally re-expressed in the measurement basis."""
    state = np.zeros(graph.num_arcs, dtype=np.complex128)
    state[arc_id] = 1.0
    return state if order is None else permute_state(state, order)


def evolve_and_measure(evolution: np.ndarray, part: Partition, psi0: np.ndarray,
                       steps: int) -> WalkTrace:
    """Iterate the evolution and record the site distribution at every step."""
    evolution = np.asarray(evolution, dtype=np.complex128)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    dim = part.dim
    if evolution.shape != (dim, dim) or psi0.shape != (dim,):
        raise DimensionError(f"evolution {evolution.shape} / state {psi0.shape} "
                             f"incompatible with partition dimension {dim}")
    norm = float(np.linalg.norm(psi0))
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"initial state norm {norm} is not 1")

    states = np.empty((steps + 1, dim), dtype=np.complex128)
    states[0] = psi0
    for n in range(steps):
        states[n + 1] = evolution @ states[n]
    distributions = np.add.reduceat(np.abs(states) ** 2, part.offsets, axis=1)
    cesaro = distributions[: max(steps, 1)].mean(axis=0)
    return WalkTrace(part, states, distributions, cesaro)


def time_average(trace: WalkTrace, region: str | set[str], upto: int | None = None) -> float:
    """Cesaro mean over n = 0..upto-1 of the probability of finding the walker in `region`."""
    labels = {region} if isinstance(region, str) else set(region)
    idx = [trace.partition.index(lab) for lab in labels]
    n = trace.steps if upto is None else upto
    if not (1 <= n <= trace.steps + 1):
        raise DomainError(f"average over {n} steps not available in a {trace.steps}-step trace")
    return float(trace.distributions[:n, idx].sum(axis=1).mean())


def limit_distribution(gen: GeneratorDecomposition, part: Partition, psi0: np.ndarray,
                       gap: float = 1e-8) -> dict[str, float]:
    """Closed-form Cesaro limit: sum over distinct generator eigenvalues of the
    block masses of the eigenprojected initial state."""
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise DomainError("initial state must be normalized")
    dec = hermitian_eig(gen.matrix)
    acc = np.zeros(part.num_blocks, dtype=np.float64)
    for _, _, sl in cluster_eigenvalues(dec.eigenvalues, gap):
        vectors = dec.eigenvectors[:, sl]
        component = vectors @ (vectors.conj().T @ psi0)
        acc += part.block_probabilities(component)
    return dict(zip(part.labels, acc.tolist()))


def localization_report(gen: GeneratorDecomposition, part: Partition, psi0: np.ndarray,
                        window: tuple[int, int], atlas: SubspaceAtlas | None = None,
                        gap: float = 1e-8) -> LocalizationReport:
    """Certified and empirical localization diagnostics for one initial state.

    The certified bound is max over sites of the Cesaro limit, which always
    bounds the limsup of the site probabilities from below.  The windowed
    empirical max is an estimate for display, never a certificate.  In
    finite dimension the generator has pure point spectrum, so the overlap
    with the point-spectral subspace is the full norm of the state.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    limit = limit_distribution(gen, part, psi0, gap)
    certified = max(limit.values())

    dec = hermitian_eig(gen.matrix)
    overlap = 0.0
    for _, _, sl in cluster_eigenvalues(dec.eigenvalues, gap):
        vectors = dec.eigenvectors[:, sl]
        overlap += float(np.linalg.norm(vectors.conj().T @ psi0) ** 2)

    n0, n1 = window
    if not (0 <= n0 <= n1):
        raise DomainError(f"bad observation window {window}")
    evolution = apply_function(dec, lambda x: np.exp(1j * x))
    best = np.zeros(part.num_blocks, dtype=np.float64)
    psi = psi0.copy()
    for n in range(n1 + 1):
        if n >= n0:
            np.maximum(best, part.block_probabilities(psi), out=best)
        psi = evolution @ psi
    return LocalizationReport(
        limit=limit,
        certified_bound=float(certified),
        overlap=overlap,
        point_spectrum_nonempty=gen.dim > 0,
        has_correction_space=None if atlas is None else atlas.correction_space.dim > 0,
        empirical_max=dict(zip(part.labels, best.tolist())),
        window=(n0, n1),
    )


def infer_graph(w: np.ndarray, part: Partition, tol_block: float | None = None) -> InferredDigraph:
    """Digraph induced by a unitary and a partition: arc v -> u iff block (u, v)
    exceeds the threshold (default 1e-10 times the operator norm)."""
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (part.dim, part.dim):
        raise DimensionError(f"operator shape {w.shape} incompatible with partition {part.dim}")
    if tol_block is None:
        tol_block = 1e-10 * float(np.linalg.norm(w, 2))
    arcs = []
    for u in part.labels:
        rows = part.block(u)
        for v in part.labels:
            block = w[rows, part.block(v)]
            if float(np.linalg.norm(block, 2)) > tol_block:
                arcs.append((v, u))
    return InferredDigraph(part.labels, tuple(arcs))


def block_unitarity_check(w: np.ndarray, part: Partition, tol: float = 1e-10) -> ValidationReport:
    """Blockwise unitarity: both block-product sums must resolve delta_{uv} P_v."""
    w = np.asarray(w, dtype=np.complex128)
    dim = part.dim
    if w.shape != (dim, dim):
        raise DimensionError(f"operator shape {w.shape} incompatible with partition {dim}")
    chk = Checker()
    ws = w.conj().T
    scale = tol * dim
    for u in part.labels:
        ru = part.block(u)
        for v in part.labels:
            rv = part.block(v)
            expected = np.eye(rv.stop - rv.start) if u == v else 0.0
            right = sum(w[ru, part.block(x)] @ ws[part.block(x), rv] for x in part.labels)
            left = sum(ws[ru, part.block(x)] @ w[part.block(x), rv] for x in part.labels)
            chk.expect_small(float(np.linalg.norm(right - expected)), scale,
                             "block-sum-right", f"({u},{v})")
            chk.expect_small(float(np.linalg.norm(left - expected)), scale,
                             "block-sum-left", f"({u},{v})")
    chk.expect_small(float(np.linalg.norm(ws @ w - np.eye(dim))), scale, "gram-identity")
    return chk.close()


def equivalence_transform(w1: np.ndarray, w2: np.ndarray, part: Partition, psi0: np.ndarray,
                          steps: int, tol: float = 1e-10) -> ValidationReport:
    """Probabilistic content of unitary equivalence of w1 w2 and w2 w1.

    The walk driven by w1 w2 measured in the given partition must match the
    walk driven by w2 w1, started from w2 psi0 and measured in the
    w2-transformed partition (equivalently: pull each state back by w2*).
    """
    w1 = np.asarray(w1, dtype=np.complex128)
    w2 = np.asarray(w2, dtype=np.complex128)
    dim = part.dim
    for name, w in (("first", w1), ("second", w2)):
        defect = float(np.linalg.norm(w.conj().T @ w - np.eye(dim)))
        if defect > 1e-9 * dim:
            raise DomainError(f"{name} factor is not unitary (defect {defect:.3e})")

    trace = evolve_and_measure(w1 @ w2, part, psi0, steps)
    chk = Checker()
    tilde = w2 @ w1
    pullback = w2.conj().T
    psi = w2 @ np.asarray(psi0, dtype=np.complex128)
    for n in range(steps + 1):
        transformed = part.block_probabilities(pullback @ psi)
        deviation = float(np.max(np.abs(transformed - trace.distributions[n])))
        chk.expect_small(deviation, tol, "equivalent-distributions", f"n={n}")
        psi = tilde @ psi
    return chk.close()


def _homogeneous_evolution(p: np.ndarray, q: np.ndarray, n_sites: int) -> np.ndarray:
    dim = 2 * n_sites
    u = np.zeros((dim, dim), dtype=np.complex128)
    for x in range(n_sites):
        ahead = (x + 1) % n_sites
        behind = (x - 1) % n_sites
        u[2 * ahead: 2 * ahead + 2, 2 * x: 2 * x + 2] = q
        u[2 * behind: 2 * behind + 2, 2 * x: 2 * x + 2] = p
    return u


def homogeneous_cycle_walk(p: np.ndarray, q: np.ndarray, n_sites: int,
                           tol: float = 1e-10) -> tuple[np.ndarray, Partition]:
    """Space-homogeneous two-component walk on a cyclic lattice.

    Site x sends its amplitude ahead through q and behind through p; the
    periodic wrap keeps the evolution exactly unitary at any finite size.
    The two 2x2 blocks must satisfy the completeness and no-overlap
    identities that make the assembled operator unitary; the first violated
    identity is named in the error.
    """
    if n_sites < 3:
        raise DomainError(f"cyclic lattice needs at least 3 sites, got {n_sites}")
    p = np.asarray(p, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    if p.shape != (2, 2) or q.shape != (2, 2):
        raise DimensionError("coin blocks must be 2x2")
    eye = np.eye(2)
    identities = {
        "PP* + QQ* = 1": p @ p.conj().T + q @ q.conj().T - eye,
        "P*P + Q*Q = 1": p.conj().T @ p + q.conj().T @ q - eye,
        "PQ* = 0": p @ q.conj().T,
        "Q*P = 0": q.conj().T @ p,
    }
    for name, defect in identities.items():
        magnitude = float(np.linalg.norm(defect))
        if magnitude > tol:
            raise DomainError(f"coin blocks violate {name} (defect {magnitude:.3e})")
    part = Partition(tuple(str(x) for x in range(n_sites)), (2,) * n_sites)
    return _homogeneous_evolution(p, q, n_sites), part
