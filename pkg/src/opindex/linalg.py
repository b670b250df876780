"""Dense complex linear-algebra kernels shared by every other module.

All operators in scope are small enough (a few thousand rows) for dense
LAPACK routines, and every exponentiated operator is Hermitian, so matrix
exponentials are computed exclusively through the eigendecomposition.  That
makes the semigroup property exact up to rounding and keeps the large-t
behaviour trivially correct.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .constants import (
    EIG_RECONSTRUCT_REL_TOL,
    HERMITIAN_REL_TOL,
    ORTHONORMAL_TOL,
)
from .errors import DomainError, EigensolverError, HermitianityError, ShapeError


def as_square_matrix(m) -> np.ndarray:
    """Coerce to a complex 2-d square array, raising ShapeError otherwise."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_defect(m: np.ndarray) -> float:
    """Relative size of M - M^H, measured against the largest entry."""
    m = np.asarray(m)
    scale = max(float(np.max(np.abs(m))), 1e-300)
    return float(np.max(np.abs(m - m.conj().T))) / scale


def require_hermitian(m, rel_tol: float = HERMITIAN_REL_TOL) -> np.ndarray:
    """Validate the Hermitian flag of a matrix and return it as an array."""
    a = as_square_matrix(m)
    defect = hermitian_defect(a)
    if defect > rel_tol:
        raise HermitianityError(
            f"matrix is not Hermitian: relative defect {defect:.3e} > {rel_tol:.1e}"
        )
    return a


class EigenSystem(NamedTuple):
    """Ascending eigenvalues and the unitary matrix of eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def herm_eig(m, check: bool = True) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square Hermitian matrix.
    check : bool
        Verify the Hermitian flag, the reconstruction residual and the
        orthonormality of the eigenvector columns.

    Returns
    -------
    EigenSystem
        ``values`` ascending, ``vectors[:, i]`` the i-th eigenvector.
    """
    a = require_hermitian(m) if check else as_square_matrix(m)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare in LAPACK
        raise EigensolverError(f"eigh failed to converge: {exc}") from exc
    if check:
        scale = max(float(np.max(np.abs(a))), 1e-300)
        recon = vectors @ (values[:, None] * vectors.conj().T)
        resid = float(np.max(np.abs(a - recon))) / scale
        if resid > EIG_RECONSTRUCT_REL_TOL:
            raise EigensolverError(
                f"eigendecomposition reconstruction residual {resid:.3e}"
            )
        gram = vectors.conj().T @ vectors
        ortho = float(np.max(np.abs(gram - np.eye(len(values)))))
        if ortho > ORTHONORMAL_TOL:
            raise EigensolverError(f"eigenvectors not orthonormal: {ortho:.3e}")
    return EigenSystem(values=values, vectors=vectors)


def heat_operator(m, t: float, eig: EigenSystem | None = None) -> np.ndarray:
    """Heat semigroup element exp(-t M) for Hermitian M via eigenmodes.

    Returns V exp(-t Lambda) V^H symmetrised to be exactly Hermitian.  The
    result has all eigenvalues in (0, exp(-t lambda_min)].
    """
    if t <= 0:
        raise DomainError(f"heat flow time must be positive, got {t}")
    es = eig if eig is not None else herm_eig(m)
    weights = np.exp(-t * es.values)
    out = es.vectors @ (weights[:, None] * es.vectors.conj().T)
    return 0.5 * (out + out.conj().T)


def trace(m) -> complex:
    """Trace of a square matrix."""
    a = as_square_matrix(m)
    return complex(np.trace(a))


def singular_values(m) -> np.ndarray:
    """Singular values in descending order (length min(rows, cols))."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {a.shape}")
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverError(f"svd failed to converge: {exc}") from exc
