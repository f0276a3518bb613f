"""Subspace decomposition of the walk space and the predicted spectrum of the
evolution.

The unit-circle spectrum of the evolution is the arccos image of the
discriminant spectrum, taken twice (conjugate pair e^{+i angle}, e^{-i angle}
represented as angles t and 2 pi - t), plus eigenvalues +1 and -1 with extra
multiplicities contributed by the correction space ker(d) intersected with
the shift eigenspaces.  Verification never pairs floating eigenvalue lists;
it counts kernel dimensions of U - e^{i angle} at each predicted angle and
checks that the multiplicities exhaust the dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import (BAND_INTERIOR, BAND_MINUS_ONE, BAND_OTHER, BAND_PLUS_ONE, TOL_KER,
                     Subspace, arccos_clamped, cluster_eigenvalues, hermitian_eig,
                     intersect_subspaces, nullspace, orth_complement, projector,
                     projector_distance, SpectralDecomposition)
from .report import Checker, ValidationReport
from .walk import WalkInstance

PROV_MAPPED = "mapped"
PROV_PLUS = "plus-correction"
PROV_MINUS = "minus-correction"
_PROV_ORDER = {PROV_MAPPED: 0, PROV_PLUS: 1, PROV_MINUS: 2}


@dataclass(frozen=True)
class SubspaceAtlas:
    """Named subspaces of the walk space, all as explicit orthonormal bases."""

    boundary_range: Subspace        # Ran(d*): where the coin acts as +1
    boundary_range_perp: Subspace   # ker(d)
    shift_plus: Subspace            # ker(shift - 1)
    shift_minus: Subspace           # ker(shift + 1)
    correction_space: Subspace      # ker(d) /\ ker(d shift)
    correction_plus: Subspace       # ker(d) /\ ker(shift + 1): evolution acts as +1
    correction_minus: Subspace      # ker(d) /\ ker(shift - 1): evolution acts as -1
    lifted_plus: Subspace           # d* ker(discriminant - 1)
    lifted_minus: Subspace          # d* ker(discriminant + 1)
    rotating: Subspace              # ker(evolution^2 - 1) orthocomplement
    mult_plus: int
    mult_minus: int

    @property
    def dim(self) -> int:
        return self.rotating.ambient_dim


@dataclass(frozen=True)
class SpectralLine:
    angle: float        # in [0, 2 pi)
    multiplicity: int
    provenance: str     # "mapped" | "plus-correction" | "minus-correction"


@dataclass(frozen=True)
class SpectrumPrediction:
    lines: tuple[SpectralLine, ...]
    dim: int

    @property
    def total_multiplicity(self) -> int:
        return sum(line.multiplicity for line in self.lines)


def boundary_subspaces(inst: WalkInstance, tol: float = TOL_KER) -> SubspaceAtlas:
    """Compute the full subspace atlas by brute-force kernels and intersections."""
    d = inst.boundary
    db = inst.shifted_boundary
    s, u, t = inst.shift, inst.evolution, inst.discriminant
    dim_h = inst.dim_h
    eye_h = np.eye(dim_h)
    eye_k = np.eye(inst.dim_k)

    boundary_range = Subspace(dim_h, d.conj().T)  # columns of d* are orthonormal
    boundary_range_perp = nullspace(d, tol)
    shift_plus = nullspace(s - eye_h, tol)
    shift_minus = nullspace(s + eye_h, tol)
    correction_space = intersect_subspaces(nullspace(d, tol), nullspace(db, tol), tol)
    correction_plus = intersect_subspaces(boundary_range_perp, shift_minus, tol)
    correction_minus = intersect_subspaces(boundary_range_perp, shift_plus, tol)
    lifted_plus = Subspace(dim_h, d.conj().T @ nullspace(t - eye_k, tol).basis)
    lifted_minus = Subspace(dim_h, d.conj().T @ nullspace(t + eye_k, tol).basis)
    rotating = orth_complement(nullspace(u @ u - eye_h, tol), tol)
    return SubspaceAtlas(
        boundary_range=boundary_range,
        boundary_range_perp=boundary_range_perp,
        shift_plus=shift_plus,
        shift_minus=shift_minus,
        correction_space=correction_space,
        correction_plus=correction_plus,
        correction_minus=correction_minus,
        lifted_plus=lifted_plus,
        lifted_minus=lifted_minus,
        rotating=rotating,
        mult_plus=correction_plus.dim,
        mult_minus=correction_minus.dim,
    )


def atlas_report(inst: WalkInstance, atlas: SubspaceAtlas, tol: float = 1e-8) -> ValidationReport:
    """Cross-check the atlas against independently computed subspaces of U."""
    chk = Checker()
    u = inst.evolution
    dim_h = inst.dim_h
    eye = np.eye(dim_h)

    # The two routes to the corrections must agree: ker(d) /\ shift eigenspace
    # versus the correction space sliced by the shift eigenspaces.
    chk.expect_small(
        projector_distance(atlas.correction_plus,
                           intersect_subspaces(atlas.correction_space, atlas.shift_minus)),
        tol, "correction-plus-route")
    chk.expect_small(
        projector_distance(atlas.correction_minus,
                           intersect_subspaces(atlas.correction_space, atlas.shift_plus)),
        tol, "correction-minus-route")
    chk.expect(atlas.correction_space.dim == atlas.mult_plus + atlas.mult_minus,
               "correction-dimension-split", "-",
               float(atlas.correction_space.dim - atlas.mult_plus - atlas.mult_minus))

    dims = (atlas.rotating.dim + atlas.lifted_plus.dim + atlas.lifted_minus.dim
            + atlas.mult_plus + atlas.mult_minus)
    chk.expect(dims == dim_h, "dimension-completeness", "-", float(dims - dim_h))

    # d* ker(T -+ 1) is orthogonal to the corrections (they live in ker(d)).
    for name, lifted, corr in (("plus", atlas.lifted_plus, atlas.correction_plus),
                               ("minus", atlas.lifted_minus, atlas.correction_minus)):
        if lifted.dim and corr.dim:
            overlap = float(np.linalg.norm(lifted.basis.conj().T @ corr.basis, 2))
            chk.expect_small(overlap, tol, "lifted-correction-orthogonality", name)

    # Kernels of U -+ 1 match the assembled decompositions.
    for name, sign, lifted, corr in (("plus", 1.0, atlas.lifted_plus, atlas.correction_plus),
                                     ("minus", -1.0, atlas.lifted_minus, atlas.correction_minus)):
        direct = nullspace(u - sign * eye)
        assembled = Subspace(dim_h, np.hstack([lifted.basis, corr.basis]))
        chk.expect_small(projector_distance(direct, assembled), tol,
                         f"kernel-{name}-decomposition")

    # U leaves the rotating, degenerate, and correction subspaces invariant.
    degenerate = Subspace(dim_h, np.hstack([atlas.lifted_plus.basis, atlas.lifted_minus.basis]))
    for name, space in (("rotating", atlas.rotating), ("degenerate", degenerate),
                        ("correction", atlas.correction_space)):
        p = projector(space)
        chk.expect_small(float(np.linalg.norm((eye - p) @ u @ p, 2)), 1e-9 * dim_h,
                         "evolution-invariance", name)
    return chk.close()


def mapped_spectrum(tdec: SpectralDecomposition, atlas: SubspaceAtlas,
                    cluster_gap: float = 1e-8) -> SpectrumPrediction:
    """Predicted unit-circle spectrum from the discriminant spectrum plus corrections.

    An interior eigenvalue x of multiplicity m contributes the conjugate
    angle pair arccos(x) and 2 pi - arccos(x), each with multiplicity m;
    boundary eigenvalues map to angles 0 and pi; the corrections add
    mult_plus at 0 and mult_minus at pi.
    """
    if any(band == BAND_OTHER for band in tdec.bands):
        bad = [float(v) for v, b in zip(tdec.eigenvalues, tdec.bands) if b == BAND_OTHER]
        raise DomainError(f"discriminant eigenvalues outside the clamp range: {bad}")

    lines: list[SpectralLine] = []
    n_plus = len(tdec.band_indices(BAND_PLUS_ONE))
    n_minus = len(tdec.band_indices(BAND_MINUS_ONE))
    if n_plus:
        lines.append(SpectralLine(0.0, n_plus, PROV_MAPPED))
    if n_minus:
        lines.append(SpectralLine(np.pi, n_minus, PROV_MAPPED))

    interior = tdec.eigenvalues[tdec.band_indices(BAND_INTERIOR)]
    for center, mult, _ in cluster_eigenvalues(interior, cluster_gap):
        angle = arccos_clamped(center)
        lines.append(SpectralLine(angle, mult, PROV_MAPPED))
        lines.append(SpectralLine(2.0 * np.pi - angle, mult, PROV_MAPPED))

    if atlas.mult_plus:
        lines.append(SpectralLine(0.0, atlas.mult_plus, PROV_PLUS))
    if atlas.mult_minus:
        lines.append(SpectralLine(np.pi, atlas.mult_minus, PROV_MINUS))

    lines.sort(key=lambda ln: (ln.angle, _PROV_ORDER[ln.provenance]))
    return SpectrumPrediction(tuple(lines), atlas.dim)


def _grouped_angles(pred: SpectrumPrediction, gap: float = 1e-8) -> list[tuple[float, int]]:
    groups: list[tuple[float, int]] = []
    for line in pred.lines:  # already sorted by angle
        if groups and abs(line.angle - groups[-1][0]) <= gap:
            groups[-1] = (groups[-1][0], groups[-1][1] + line.multiplicity)
        else:
            groups.append((line.angle, line.multiplicity))
    return groups


def verify_spectral_mapping(inst: WalkInstance, pred: SpectrumPrediction,
                            tol: float = 1e-8) -> ValidationReport:
    """Check each predicted angle by counting the kernel dimension of U - e^{i angle}.

    The check is exhaustive: matching kernel dimension at every predicted
    angle plus total-multiplicity conservation leaves no room for
    unpredicted eigenvalues.
    """
    chk = Checker()
    u = inst.evolution
    eye = np.eye(inst.dim_h)
    for angle, mult in _grouped_angles(pred):
        found = nullspace(u - np.exp(1j * angle) * eye, tol).dim
        chk.expect(found == mult, "eigenspace-multiplicity", f"angle {angle:.12g}",
                   float(found - mult))
    total = pred.total_multiplicity
    chk.expect(total == inst.dim_h, "total-multiplicity", "-", float(total - inst.dim_h))
    return chk.close()
