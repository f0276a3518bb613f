"""Dense complex linear algebra: Hermitian eigendecompositions, functional
calculus, nullspaces and subspace arithmetic.

Operators are plain ``numpy.ndarray`` matrices.  Eigendecompositions go
through LAPACK's Hermitian solver only; nothing in the package ever calls a
non-Hermitian eigensolver (kernels of non-Hermitian operators are obtained
from the Gram operator a*a instead).
"""

from __future__ import annotations

import numpy as np
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DimensionError, DomainError

TOL_EIG = 1e-11     # residual / reconstruction quality of eigendecompositions
TOL_ORTH = 1e-11    # orthonormality of computed eigenbases
TOL_KER = 1e-9      # default relative kernel tolerance and band-classification margin
ARCCOS_CLAMP = 1e-9  # how far outside [-1, 1] an eigenvalue may drift before arccos rejects it
# Relative resolution of a zero eigenvalue of a Gram matrix computed by eigh;
# kernel selection cannot be sharper than this no matter how small tol is.
KERNEL_FLOOR = 1e-13

BAND_INTERIOR = "interior"
BAND_PLUS_ONE = "plus_one"
BAND_MINUS_ONE = "minus_one"
BAND_OTHER = "other"


def classify_band(value: float, tol: float = TOL_KER) -> str:
    """Band tag of a real eigenvalue relative to the interval [-1, 1]."""
    if abs(value - 1.0) <= tol:
        return BAND_PLUS_ONE
    if abs(value + 1.0) <= tol:
        return BAND_MINUS_ONE
    if abs(value) < 1.0 - tol:
        return BAND_INTERIOR
    return BAND_OTHER


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) with an orthonormal eigenvector column per value."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    bands: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def band_indices(self, band: str) -> np.ndarray:
        return np.array([k for k, b in enumerate(self.bands) if b == band], dtype=np.intp)

    def band_vectors(self, band: str) -> np.ndarray:
        return self.eigenvectors[:, self.band_indices(band)]

    def snapped_eigenvalues(self) -> np.ndarray:
        """Eigenvalues with the boundary bands replaced by exact +-1.

        Functions like arccos and sqrt(1 - x^2) have unbounded slope at the
        interval ends, so evaluating them at a boundary eigenvalue that is
        off by machine epsilon loses half the digits.  The band
        classification is authoritative: snapped values keep the calculus
        exact there.
        """
        values = self.eigenvalues.copy()
        for k, band in enumerate(self.bands):
            if band == BAND_PLUS_ONE:
                values[k] = 1.0
            elif band == BAND_MINUS_ONE:
                values[k] = -1.0
        return values


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^n given by orthonormal basis columns (possibly none)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self) -> None:
        if self.basis.shape[0] != self.ambient_dim:
            raise DimensionError(
                f"basis rows {self.basis.shape[0]} != ambient dimension {self.ambient_dim}")
        gram = self.basis.conj().T @ self.basis
        defect = np.linalg.norm(gram - np.eye(self.dim), np.inf) if self.dim else 0.0
        if defect > 1e-10 * max(1, self.ambient_dim):
            raise DomainError(f"basis not orthonormal (defect {defect:.3e})")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=np.complex128))


def hermitian_eig(a: np.ndarray, tol_band: float = TOL_KER) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, with band tags per eigenvalue.

    The input is symmetrized before factorization; a hermiticity defect
    beyond 1e-12 * ||a|| is rejected rather than silently absorbed.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    scale = np.linalg.norm(a)
    defect = np.linalg.norm(a - a.conj().T)
    if defect > 1e-12 * scale:
        raise DomainError(f"matrix is not Hermitian: ||a - a*|| = {defect:.3e} > 1e-12 * ||a||")
    sym = (a + a.conj().T) / 2.0
    values, vectors = np.linalg.eigh(sym)
    bands = tuple(classify_band(float(v), tol_band) for v in values)
    return SpectralDecomposition(values, vectors, bands)


def apply_function(dec: SpectralDecomposition, f: Callable[[float], complex],
                   snap_bands: bool = False) -> np.ndarray:
    """Assemble sum_k f(lambda_k) v_k v_k* from a spectral decomposition.

    With snap_bands=True the function is evaluated on the band-snapped
    eigenvalues (boundary bands at exact +-1).
    """
    values = dec.snapped_eigenvalues() if snap_bands else dec.eigenvalues
    fvals = np.array([f(float(v)) for v in values], dtype=np.complex128)
    if not np.all(np.isfinite(fvals)):
        bad = values[~np.isfinite(fvals)]
        raise DomainError(f"function undefined on eigenvalues {bad}")
    return (dec.eigenvectors * fvals) @ dec.eigenvectors.conj().T


def arccos_clamped(value: float, clamp: float = ARCCOS_CLAMP) -> float:
    """arccos tolerating floating drift up to `clamp` outside [-1, 1]."""
    if value > 1.0 + clamp or value < -1.0 - clamp:
        raise DomainError(f"arccos argument {value} outside [-1-{clamp}, 1+{clamp}]")
    return float(np.arccos(np.clip(value, -1.0, 1.0)))


def nullspace(a: np.ndarray, tol: float = TOL_KER) -> Subspace:
    """Orthonormal basis of {v : ||a v|| <= tol * ||a|| * ||v||}.

    Computed from the Hermitian Gram operator a*a: kernel directions are
    the eigenvectors with eigenvalue <= tol^2 * lambda_max, floored at the
    Gram eigensolver's own resolution.  A matrix whose norm is itself below
    the roundoff scale of the O(1)-normalized operators used throughout the
    package is treated as zero (full kernel).
    """
    a = np.asarray(a, dtype=np.complex128)
    if tol <= 0:
        raise DomainError("nullspace tolerance must be positive")
    n = a.shape[1]
    gram = a.conj().T @ a
    dec = hermitian_eig(gram)
    lam_max = max(float(dec.eigenvalues[-1]), 0.0) if n else 0.0
    if lam_max <= 1e-24:  # spectral norm below 1e-12: numerically the zero operator
        return Subspace.full(n)
    keep = dec.eigenvalues <= max(tol * tol, KERNEL_FLOOR) * lam_max
    return Subspace(n, dec.eigenvectors[:, keep])


def projector(x: Subspace) -> np.ndarray:
    """Orthogonal projector B B* onto the subspace."""
    return x.basis @ x.basis.conj().T


def orth_complement(x: Subspace, tol: float = TOL_KER) -> Subspace:
    return nullspace(projector(x), tol) if x.dim else Subspace.full(x.ambient_dim)


def intersect_subspaces(x: Subspace, y: Subspace, tol: float = TOL_KER) -> Subspace:
    """Intersection via the stacked projector complements: v with P_x v = v = P_y v."""
    if x.ambient_dim != y.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {x.ambient_dim} vs {y.ambient_dim}")
    n = x.ambient_dim
    eye = np.eye(n, dtype=np.complex128)
    stacked = np.vstack([eye - projector(x), eye - projector(y)])
    if np.linalg.norm(stacked) == 0.0:  # both subspaces are the full space
        return Subspace.full(n)
    return nullspace(stacked, tol)


def projector_distance(x: Subspace, y: Subspace) -> float:
    """Spectral-norm distance between the two orthogonal projectors."""
    if x.ambient_dim != y.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {x.ambient_dim} vs {y.ambient_dim}")
    return float(np.linalg.norm(projector(x) - projector(y), 2))


def cluster_eigenvalues(values: Sequence[float], gap: float = 1e-8) -> list[tuple[float, int, slice]]:
    """Group an ascending eigenvalue list into (mean, multiplicity, slice) clusters.

    Consecutive values closer than `gap` belong to the same cluster.
    """
    values = np.asarray(values, dtype=np.float64)
    clusters: list[tuple[float, int, slice]] = []
    start = 0
    for k in range(1, values.shape[0] + 1):
        if k == values.shape[0] or values[k] - values[k - 1] > gap:
            block = values[start:k]
            clusters.append((float(block.mean()), k - start, slice(start, k)))
            start = k
    return clusters


def operator_to_json(a: np.ndarray) -> dict:
    a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def operator_from_json(data: dict) -> np.ndarray:
    a = np.array(data["re"], dtype=np.float64) + 1j * np.array(data["im"], dtype=np.float64)
    if a.shape != (data["rows"], data["cols"]):
        raise DimensionError(f"operator JSON shape mismatch: {a.shape} vs "
                             f"({data['rows']}, {data['cols']})")
    return a
