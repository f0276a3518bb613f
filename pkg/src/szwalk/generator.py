"""Construction of the Hermitian generator of the evolution.

The generator is assembled spectrally, one interior discriminant
eigenvector at a time.  For an interior eigenvalue x with eigenvector f,
the two chiral intertwiner adjoints produce unit vectors

    u+ = (d* - ds* e^{+i arccos x}) f / sqrt(2 (1 - x^2)),
    u- = (d* e^{+i arccos x} - ds*) f / sqrt(2 (1 - x^2)),

with d the boundary and ds the shifted boundary.  These families are
orthonormal, span the two rotating blocks, and carry generator eigenvalues
arccos x and 2 pi - arccos x.  Together with the kernels of U -+ 1 (built
from the lifted discriminant kernels plus the correction spaces) they give
the four-block Hermitian generator whose exponential reproduces the
evolution.  No division by sqrt(1 - x^2) ever happens near the boundary
band: boundary eigenvalues are excluded before assembly, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .linalg import (BAND_INTERIOR, BAND_MINUS_ONE, BAND_PLUS_ONE, TOL_KER, Subspace,
                     apply_function, arccos_clamped, hermitian_eig, nullspace, projector,
                     projector_distance, SpectralDecomposition)
from .report import Checker, ValidationReport
from .spectral import SubspaceAtlas
from .walk import WalkInstance

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ChiralIntertwiners:
    """The partial isometries connecting the interior discriminant spectrum
    to the two rotating blocks of the walk space."""

    plus: np.ndarray                # shape (dim_k, dim_h); zero on the non-rotating part
    minus: np.ndarray
    theta: np.ndarray               # arccos of the discriminant, as a dim_k matrix
    interior_projector: np.ndarray  # projector onto the interior spectral subspace of K
    interior_values: np.ndarray     # interior eigenvalues, ascending
    interior_vectors: np.ndarray    # matching eigenvector columns

    @property
    def interior_dim(self) -> int:
        return self.interior_values.shape[0]


@dataclass(frozen=True)
class GeneratorDecomposition:
    """Hermitian generator with its four orthogonal blocks.

    Block spectra: rotating_plus in (0, pi), rotating_minus in (pi, 2 pi),
    the fixed block (ker(U - 1)) at 0 and the flipped block (ker(U + 1))
    at pi.  spectrum_plus / spectrum_minus are aligned with the basis
    columns of their blocks.
    """

    matrix: np.ndarray
    rotating_plus: Subspace
    rotating_minus: Subspace
    fixed: Subspace
    flipped: Subspace
    spectrum_plus: np.ndarray
    spectrum_minus: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def block_dims(self) -> dict[str, int]:
        return {
            "rotating_plus": self.rotating_plus.dim,
            "rotating_minus": self.rotating_minus.dim,
            "fixed": self.fixed.dim,
            "flipped": self.flipped.dim,
        }


def build_intertwiners(inst: WalkInstance, tdec: SpectralDecomposition,
                       tol: float = TOL_KER) -> ChiralIntertwiners:
    """Spectral assembly of the chiral intertwiners from the interior band."""
    d_adj = inst.boundary.conj().T
    ds_adj = inst.shifted_boundary.conj().T
    dim_k, dim_h = inst.boundary.shape

    interior = [k for k in tdec.band_indices(BAND_INTERIOR)
                if 1.0 - float(tdec.eigenvalues[k]) ** 2 > tol * tol]
    values = tdec.eigenvalues[interior]
    vectors = tdec.eigenvectors[:, interior]

    angles = np.array([arccos_clamped(float(v)) for v in values])
    phases = np.exp(1j * angles)
    denom = np.sqrt(2.0 * (1.0 - values ** 2))
    lifted = d_adj @ vectors
    lifted_shifted = ds_adj @ vectors
    u_plus = (lifted - lifted_shifted * phases) / denom
    u_minus = (lifted * phases - lifted_shifted) / denom

    for name, fam in (("plus", u_plus), ("minus", u_minus)):
        if fam.shape[1]:
            defect = float(np.max(np.abs(np.linalg.norm(fam, axis=0) - 1.0)))
            if defect > 1e-10 * dim_h:
                raise ConsistencyError(f"{name} intertwiner images not unit vectors "
                                       f"(defect {defect:.3e})")

    return ChiralIntertwiners(
        plus=vectors @ u_plus.conj().T,
        minus=vectors @ u_minus.conj().T,
        theta=apply_function(tdec, arccos_clamped, snap_bands=True),
        interior_projector=vectors @ vectors.conj().T,
        interior_values=values,
        interior_vectors=vectors,
    )


def intertwiners_matrix_route(inst: WalkInstance,
                              tdec: SpectralDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """The closed-form route: 1/sqrt(2 (1 - T^2)) times the boundary combinations.

    The inverse square root is taken through the functional calculus with
    the boundary band zeroed out.  Retained as a cross-check of the
    spectral assembly on well-separated spectra.
    """
    def inv_root(x: float) -> complex:
        if 1.0 - x * x <= TOL_KER * TOL_KER:
            return 0.0
        return 1.0 / np.sqrt(2.0 * (1.0 - x * x))

    scale = apply_function(tdec, inv_root, snap_bands=True)
    phase_neg = apply_function(tdec, lambda x: np.exp(-1j * arccos_clamped(x)), snap_bands=True)
    d, ds = inst.boundary, inst.shifted_boundary
    plus = scale @ (d - phase_neg @ ds)
    minus = scale @ (phase_neg @ d - ds)
    return plus, minus


def kernels_of_u(inst: WalkInstance, tdec: SpectralDecomposition, atlas: SubspaceAtlas,
                 tol: float = 1e-8) -> tuple[Subspace, Subspace]:
    """Kernels of U -+ 1, assembled as lifted discriminant kernels plus corrections.

    Each assembled basis is verified against the directly computed
    nullspace of U -+ 1; disagreement means an upstream tolerance
    misclassified the spectrum and is a hard error.
    """
    d_adj = inst.boundary.conj().T
    dim_h = inst.dim_h
    eye = np.eye(dim_h)
    out: list[Subspace] = []
    for sign, band, correction in ((1.0, BAND_PLUS_ONE, atlas.correction_plus),
                                   (-1.0, BAND_MINUS_ONE, atlas.correction_minus)):
        assembled = Subspace(dim_h, np.hstack([d_adj @ tdec.band_vectors(band),
                                               correction.basis]))
        direct = nullspace(inst.evolution - sign * eye)
        distance = projector_distance(assembled, direct)
        if distance > tol:
            raise ConsistencyError(
                f"kernel of (U - {sign:+.0f}) mismatch: projector distance {distance:.3e}")
        out.append(assembled)
    return out[0], out[1]


def build_generator(inst: WalkInstance, chiral: ChiralIntertwiners,
                    kernels: tuple[Subspace, Subspace]) -> GeneratorDecomposition:
    """Assemble the Hermitian generator from its four spectral blocks."""
    fixed, flipped = kernels
    dim_h = inst.dim_h

    basis_plus = chiral.plus.conj().T @ chiral.interior_vectors
    basis_minus = chiral.minus.conj().T @ chiral.interior_vectors
    angles = np.array([arccos_clamped(float(v)) for v in chiral.interior_values])

    m = chiral.interior_dim
    total = 2 * m + fixed.dim + flipped.dim
    if total != dim_h:
        raise ConsistencyError(f"block dimensions {2 * m} + {fixed.dim} + {flipped.dim} "
                               f"do not sum to {dim_h}")

    matrix = ((basis_plus * angles) @ basis_plus.conj().T
              + (basis_minus * (TWO_PI - angles)) @ basis_minus.conj().T
              + np.pi * (flipped.basis @ flipped.basis.conj().T))
    matrix = (matrix + matrix.conj().T) / 2.0

    return GeneratorDecomposition(
        matrix=matrix,
        rotating_plus=Subspace(dim_h, basis_plus),
        rotating_minus=Subspace(dim_h, basis_minus),
        fixed=fixed,
        flipped=flipped,
        spectrum_plus=angles,
        spectrum_minus=TWO_PI - angles,
    )


def generator_of(inst: WalkInstance) -> GeneratorDecomposition:
    """One-call pipeline: discriminant spectrum, atlas, intertwiners, generator."""
    from .spectral import boundary_subspaces

    tdec = hermitian_eig(inst.discriminant)
    atlas = boundary_subspaces(inst)
    chiral = build_intertwiners(inst, tdec)
    kernels = kernels_of_u(inst, tdec, atlas)
    return build_generator(inst, chiral, kernels)


def verify_generator(inst: WalkInstance, gen: GeneratorDecomposition,
                     tol: float = 1e-9) -> ValidationReport:
    """Check the generator contract against the evolution it was built from.

    (a) exp(iH) reproduces U (through an independent eigendecomposition of
    the assembled H); (b) U commutes with every block projector; (c) U acts
    as +1 / -1 on the fixed / flipped blocks and the rotating spectra stay
    inside their open intervals; (d) the spectrum of H stays inside
    [0, 2 pi); (e) the four block projectors resolve the identity.
    """
    chk = Checker()
    u = inst.evolution
    dim = gen.dim
    eye = np.eye(dim)

    dec = hermitian_eig(gen.matrix)
    expo = apply_function(dec, lambda x: np.exp(1j * x))
    chk.expect_small(float(np.linalg.norm(expo - u)), tol * dim, "exponential-matches-evolution")

    blocks = {"rotating_plus": gen.rotating_plus, "rotating_minus": gen.rotating_minus,
              "fixed": gen.fixed, "flipped": gen.flipped}
    for name, space in blocks.items():
        p = projector(space)
        chk.expect_small(float(np.linalg.norm(u @ p - p @ u)), tol * dim,
                         "block-invariance", name)

    if gen.fixed.dim:
        chk.expect_small(float(np.linalg.norm(u @ gen.fixed.basis - gen.fixed.basis)),
                         tol * dim, "fixed-block-eigenvalue")
    if gen.flipped.dim:
        chk.expect_small(float(np.linalg.norm(u @ gen.flipped.basis + gen.flipped.basis)),
                         tol * dim, "flipped-block-eigenvalue")
    if gen.spectrum_plus.size:
        inside = (np.min(gen.spectrum_plus) > 0.0) and (np.max(gen.spectrum_plus) < np.pi)
        chk.expect(inside, "rotating-plus-interval", "-",
                   float(np.max(np.abs(gen.spectrum_plus - np.pi / 2)) - np.pi / 2))
    if gen.spectrum_minus.size:
        inside = (np.min(gen.spectrum_minus) > np.pi) and (np.max(gen.spectrum_minus) < TWO_PI)
        chk.expect(inside, "rotating-minus-interval", "-",
                   float(np.max(np.abs(gen.spectrum_minus - 3 * np.pi / 2)) - np.pi / 2))

    low, high = float(dec.eigenvalues[0]), float(dec.eigenvalues[-1])
    chk.expect(low >= -tol * dim and high < TWO_PI - 1e-8, "generator-spectrum-range", "-",
               max(-low, high - TWO_PI))

    resolution = sum(projector(space) for space in blocks.values())
    chk.expect_small(float(np.linalg.norm(resolution - eye)), tol * dim, "block-completeness")
    return chk.close()


def identity_report(inst: WalkInstance, tdec: SpectralDecomposition,
                    chiral: ChiralIntertwiners, atlas: SubspaceAtlas,
                    tol: float = 1e-9) -> ValidationReport:
    """The full intertwiner identity suite, as operator equations.

    Covers the product identities of the two boundary combinations, the
    partial-isometry relations of the chiral pair, the orthogonal split of
    the rotating space, and the annihilation of the degenerate and
    correction subspaces.
    """
    chk = Checker()
    d, ds, t = inst.boundary, inst.shifted_boundary, inst.discriminant
    dim_k, dim_h = d.shape
    scale = tol * dim_h

    phase_neg = apply_function(tdec, lambda x: np.exp(-1j * arccos_clamped(x)), snap_bands=True)
    phase_pos = phase_neg.conj().T
    comb_plus = d - phase_neg @ ds          # annihilates the minus chirality
    comb_minus = phase_neg @ d - ds         # annihilates the plus chirality
    target = 2.0 * (np.eye(dim_k) - t @ t)

    chk.expect_small(np.linalg.norm(comb_plus @ (d.conj().T @ phase_pos - ds.conj().T)),
                     scale, "product-mixed-plus")
    chk.expect_small(np.linalg.norm(comb_minus @ (d.conj().T - ds.conj().T @ phase_pos)),
                     scale, "product-mixed-minus")
    chk.expect_small(np.linalg.norm(comb_plus @ (d.conj().T - ds.conj().T @ phase_pos) - target),
                     scale, "product-matched-plus")
    chk.expect_small(np.linalg.norm(comb_minus @ (d.conj().T @ phase_pos - ds.conj().T) - target),
                     scale, "product-matched-minus")

    pairs = {"plus": chiral.plus, "minus": chiral.minus}
    for name, op in pairs.items():
        chk.expect_small(np.linalg.norm(op @ op.conj().T - chiral.interior_projector),
                         scale, "interior-coisometry", name)
        proj = op.conj().T @ op
        chk.expect_small(np.linalg.norm(proj @ proj - proj), scale, "chiral-projector-idempotent", name)
        chk.expect_small(np.linalg.norm(proj - proj.conj().T), scale, "chiral-projector-hermitian", name)
    chk.expect_small(np.linalg.norm(chiral.plus @ chiral.minus.conj().T), scale,
                     "cross-annihilation", "plus-minus")
    chk.expect_small(np.linalg.norm(chiral.minus @ chiral.plus.conj().T), scale,
                     "cross-annihilation", "minus-plus")

    proj_plus = chiral.plus.conj().T @ chiral.plus
    proj_minus = chiral.minus.conj().T @ chiral.minus
    chk.expect_small(np.linalg.norm(proj_plus @ proj_minus), scale, "range-orthogonality")
    chk.expect_small(np.linalg.norm(proj_plus + proj_minus - projector(atlas.rotating)),
                     scale, "rotating-split")

    # Both combinations vanish on the degenerate and correction subspaces.
    stale = np.hstack([atlas.lifted_plus.basis, atlas.lifted_minus.basis,
                       atlas.correction_space.basis])
    if stale.shape[1]:
        chk.expect_small(np.linalg.norm(comb_plus @ stale), scale, "annihilates-degenerate", "plus")
        chk.expect_small(np.linalg.norm(comb_minus @ stale), scale, "annihilates-degenerate", "minus")

    if chiral.interior_dim:
        for name, op in pairs.items():
            images = op.conj().T @ chiral.interior_vectors
            defect = float(np.max(np.abs(np.linalg.norm(images, axis=0) - 1.0)))
            chk.expect_small(defect, 1e-10 * dim_h, "adjoint-isometry", name)
    return chk.close()


def wave_equation_check(inst: WalkInstance, chiral: ChiralIntertwiners, psi0: np.ndarray,
                        n_max: int, tol: float = 1e-9) -> ValidationReport:
    """Check the discrete wave equation (f(n+1) + f(n-1)) / 2 = T f(n).

    psi0 is projected onto the plus rotating block (its natural home) and
    renormalized; f(n) is the plus intertwiner applied to the evolved state.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    proj = chiral.plus.conj().T @ (chiral.plus @ psi0)
    norm = np.linalg.norm(proj)
    if norm <= 1e-12:
        raise DomainError("initial state has no component in the plus rotating block")
    psi = proj / norm

    chk = Checker()
    t = inst.discriminant
    f_prev = chiral.plus @ psi
    psi = inst.evolution @ psi
    f_curr = chiral.plus @ psi
    for n in range(1, n_max):
        psi = inst.evolution @ psi
        f_next = chiral.plus @ psi
        residual = float(np.linalg.norm((f_next + f_prev) / 2.0 - t @ f_curr))
        chk.expect_small(residual, tol, "wave-equation", f"n={n}")
        f_prev, f_curr = f_curr, f_next
    return chk.close()
