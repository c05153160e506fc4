"""Dense complex linear algebra backbone.

Kronecker products, exponentials of skew-Hermitian matrices, principal
logarithms of unitaries, projections onto trace-orthogonal spans, and
repair of nearly special-unitary matrices. Everything here is a pure
function of ndarray inputs; matrices are complex128 and row-major.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLS
from .errors import (
    BranchAmbiguityWarning,
    DimensionMismatchError,
    NonOrthogonalBasisError,
    NotSkewHermitianError,
    NotUnitaryError,
    SingularMatrixError,
)

__all__ = [
    "AlgebraElement",
    "kron",
    "frobenius_norm",
    "is_unitary",
    "is_skew_hermitian",
    "is_traceless",
    "expm_skew",
    "logm_unitary",
    "project_onto_span",
    "nearest_special_unitary",
    "commutation_defect",
    "eigenphase_mismatch",
]


@dataclass(frozen=True)
class AlgebraElement:
    """A member of su(2^n), optionally with coordinates in a named span.

    Attributes:
        matrix: skew-Hermitian traceless complex matrix.
        basis_name: identifier of the span the coordinates refer to.
        coords: real coefficients such that
            ||matrix - sum_i coords[i] * basis_i||_F == residual_norm.
        residual_norm: distance from the raw element to the span; for
            snap-to-span repaired elements this records the pre-repair
            defect while `matrix` already equals the projection.
    """

    matrix: np.ndarray
    basis_name: Optional[str] = None
    coords: Optional[Tuple[float, ...]] = None
    residual_norm: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, AlgebraElement):
        a = a.matrix
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    return a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product a (x) b with dim(a)*dim(b) output."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def frobenius_norm(a: np.ndarray) -> float:
    """Frobenius norm, the matrix norm used throughout this package."""
    return float(np.linalg.norm(_as_matrix(a)))


def is_unitary(a: np.ndarray, tol: Optional[float] = None) -> bool:
    """Whether ||a a^dag - I||_F is below tol (default structure tol * dim)."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if tol is None:
        tol = DEFAULT_TOLS.structure * n
    return bool(np.linalg.norm(a @ a.conj().T - np.eye(n)) <= tol)


def is_skew_hermitian(a: np.ndarray, tol: Optional[float] = None) -> bool:
    """Whether ||a + a^dag||_F is below tol (default structure tol * dim)."""
    a = np.asarray(a, dtype=complex)
    if tol is None:
        tol = DEFAULT_TOLS.structure * a.shape[0]
    return bool(np.linalg.norm(a + a.conj().T) <= tol)


def is_traceless(a: np.ndarray, tol: Optional[float] = None) -> bool:
    """Whether |tr a| is below tol (default structure tol * dim)."""
    a = np.asarray(a, dtype=complex)
    if tol is None:
        tol = DEFAULT_TOLS.structure * a.shape[0]
    return bool(abs(np.trace(a)) <= tol)


def expm_skew(a, tol: Optional[float] = None) -> np.ndarray:
    """Exponential of a skew-Hermitian matrix, via Hermitian eigendecomposition.

    Writes a = i H with H Hermitian, diagonalizes H = V diag(w) V^dag and
    returns V diag(exp(i w)) V^dag, which is unitary by construction.

    Args:
        a: skew-Hermitian matrix or AlgebraElement.
        tol: skewness tolerance (default structure tol * dim).

    Raises:
        NotSkewHermitianError: if ||a + a^dag||_F exceeds tol.
    """
    a = _as_matrix(a)
    n = a.shape[0]
    if tol is None:
        tol = DEFAULT_TOLS.structure * n
    if np.linalg.norm(a + a.conj().T) > tol:
        raise NotSkewHermitianError(
            f"skewness defect {np.linalg.norm(a + a.conj().T):.3e} exceeds {tol:.3e}"
        )
    h = -1j * a
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def expm_skew_many(stack: np.ndarray) -> np.ndarray:
    """Batched expm_skew on a (..., N, N) stack; no skewness check."""
    h = -1j * stack
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def logm_unitary(u: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    Diagonalizes u through a complex Schur form (exactly unitary basis, so
    the result is skew-Hermitian by construction), takes the argument of
    each unit-modulus eigenvalue in (-pi, pi], and returns V (i args) V^dag.

    Args:
        u: unitary matrix.
        tol: unitarity tolerance (default structure tol * dim).

    Raises:
        NotUnitaryError: if ||u u^dag - I||_F exceeds tol.

    Warns:
        BranchAmbiguityWarning: if any eigenvalue lies within 1e-8 of -1,
        where the principal branch choice is ambiguous.
    """
    u = _as_matrix(u)
    n = u.shape[0]
    if tol is None:
        tol = DEFAULT_TOLS.structure * n
    if np.linalg.norm(u @ u.conj().T - np.eye(n)) > tol:
        raise NotUnitaryError(
            f"unitarity defect {np.linalg.norm(u @ u.conj().T - np.eye(n)):.3e} "
            f"exceeds {tol:.3e}"
        )
    t, z = scipy.linalg.schur(u, output="complex")
    eig = np.diagonal(t)
    if np.any(np.abs(eig + 1.0) < 1e-8):
        warnings.warn(
            "eigenvalue within 1e-8 of -1; principal log branch is ambiguous",
            BranchAmbiguityWarning,
            stacklevel=2,
        )
    args = np.angle(eig)
    return (z * (1j * args)) @ z.conj().T


def _span_stack(basis: Sequence) -> np.ndarray:
    mats = []
    for b in basis:
        m = b.matrix if hasattr(b, "matrix") else b
        mats.append(np.asarray(m, dtype=complex))
    return np.stack(mats)


def project_onto_span(
    x: np.ndarray,
    basis: Sequence,
    gram_tol: float = 1e-10,
) -> Tuple[np.ndarray, np.ndarray]:
    """Orthogonal projection of x onto the real span of a matrix basis.

    Uses the real inner product <a, b> = Re tr(a^dag b). The basis must be
    pairwise trace-orthogonal (checked through its Gram matrix).

    Args:
        x: matrix or AlgebraElement to project.
        basis: ordered matrices, AlgebraElements, or Pauli words.
        gram_tol: allowed off-diagonal Gram mass, relative to the diagonal.

    Returns:
        (coords, residual) with coords[i] = <b_i, x>/<b_i, b_i> and
        residual = x - sum_i coords[i] b_i, trace-orthogonal to every b_i.

    Raises:
        NonOrthogonalBasisError: if any off-diagonal Gram entry exceeds
            gram_tol times the geometric mean of the paired diagonals.
    """
    x = _as_matrix(x)
    stack = _span_stack(basis)
    gram = np.einsum("aji,bji->ab", stack.conj(), stack).real
    diag = np.diagonal(gram)
    if np.any(diag <= 0):
        raise NonOrthogonalBasisError("basis contains a zero element")
    scale = np.sqrt(np.outer(diag, diag))
    off = np.abs(gram - np.diag(diag))
    if np.any(off > gram_tol * scale):
        raise NonOrthogonalBasisError(
            f"off-diagonal Gram mass up to {np.max(off / scale):.3e} "
            f"exceeds {gram_tol:.3e}"
        )
    coords = np.einsum("aji,ji->a", stack.conj(), x).real / diag
    residual = x - np.tensordot(coords, stack, axes=1)
    return coords, residual


def nearest_special_unitary(a: np.ndarray) -> Tuple[np.ndarray, float]:
    """Closest unitary to a (polar factor), det-normalized into SU(N).

    Computes the polar unitary U V^dag from the SVD a = U S V^dag, then
    multiplies by exp(-i phi / N) with phi = arg det(U V^dag) so the result
    has determinant exactly one.

    Args:
        a: invertible square matrix.

    Returns:
        (u, phase) with u in SU(N) and phase = phi for diagnostics.

    Raises:
        SingularMatrixError: if the smallest singular value is below 1e-12.
    """
    a = _as_matrix(a)
    n = a.shape[0]
    u_svd, s, vh = np.linalg.svd(a)
    if s[-1] < 1e-12:
        raise SingularMatrixError(f"smallest singular value {s[-1]:.3e} below 1e-12")
    polar = u_svd @ vh
    phase = float(np.angle(np.linalg.det(polar)))
    u = polar * np.exp(-1j * phase / n)
    return u, phase


def commutation_defect(x: np.ndarray, mats: Sequence[np.ndarray]) -> float:
    """(1/m) sqrt(sum_i ||[x, m_i]||_F^2) over a list of m matrices.

    Zero iff x commutes with every element; the subspace-error metric is
    this quantity evaluated against a Cartan basis.
    """
    x = _as_matrix(x)
    stack = _span_stack(mats)
    comms = stack @ x - x @ stack
    total = float(np.sum(np.abs(comms) ** 2))
    return np.sqrt(total) / len(stack)


def eigenphase_mismatch(u1: np.ndarray, u2: np.ndarray) -> float:
    """Distance between the eigenphase multisets of two unitaries.

    Compares the angle-sorted spectra on the unit circle over all cyclic
    alignments, so values straddling the branch cut at pi match correctly.
    Returns the smallest max absolute phase difference.
    """
    p1 = np.sort(np.angle(np.linalg.eigvals(_as_matrix(u1))))
    p2 = np.sort(np.angle(np.linalg.eigvals(_as_matrix(u2))))
    n = len(p1)
    best = np.inf
    for shift in range(n):
        d = p1 - np.roll(p2, shift)
        d = np.abs((d + np.pi) % (2 * np.pi) - np.pi)
        best = min(best, float(np.max(d)))
    return best
