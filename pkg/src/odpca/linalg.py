"""Dense symmetric linear algebra: eigendecomposition, covariance, norms.

Everything operates on plain float64 numpy arrays. Eigenvectors follow a
deterministic sign convention (largest-magnitude entry positive, ties broken
by lowest index) so repeated runs produce identical bits.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, RankDeficiencyError

# Symmetry tolerance relative to the largest entry magnitude.
SYMMETRY_RTOL = 1e-12

# QR pivot threshold relative to the input column norm.
RANK_PIVOT_RTOL = 1e-10


class EigenDecomposition(NamedTuple):
    """Full eigendecomposition A = basis @ diag(values) @ basis.T."""

    values: np.ndarray  # (d,) descending
    basis: np.ndarray  # (d, d) orthonormal columns; basis[:, j] pairs with values[j]


def check_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate a square matrix with |A - A.T| within SYMMETRY_RTOL."""
    a = check_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = 1.0 + float(np.abs(a).max())
    skew = float(np.abs(a - a.T).max())
    if skew > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric: max asymmetry {skew:.3e}")
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Kill round-off asymmetry: (A + A.T) / 2."""
    return (a + a.T) / 2.0


def fix_signs(basis: np.ndarray) -> np.ndarray:
    """Flip columns so each largest-magnitude entry is positive.

    np.argmax returns the lowest index among ties, which fixes the tie rule.
    """
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


def sym_eig(a) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    a = check_symmetric(a)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        off = a - np.diag(np.diag(a))
        residual = float(np.linalg.norm(off))
        raise ConvergenceError(
            f"symmetric eigensolver did not converge ({exc}); "
            f"off-diagonal residual {residual:.6e}",
            residual=residual,
        ) from exc
    return EigenDecomposition(values[::-1].copy(), fix_signs(vectors[:, ::-1]))


def top_k_eig(a, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Leading k eigenpairs; exactly the first k columns of sym_eig."""
    a = check_symmetric(a)
    if not 1 <= k <= a.shape[0]:
        raise ValueError(f"k must be in [1, {a.shape[0]}], got {k}")
    values, basis = sym_eig(a)
    return values[:k].copy(), basis[:, :k].copy()


def empirical_covariance(samples) -> np.ndarray:
    """Second-moment matrix n^-1 sum_i x_i x_i^T.

    No mean subtraction: inputs are assumed centered (centering is an
    ingestion decision, not an algorithm one).
    """
    x = check_matrix(samples, "samples")
    return symmetrize(x.T @ x / x.shape[0])


def frobenius_norm(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.sum(a * a)))


def orthonormalize(b) -> np.ndarray:
    """Orthonormal basis with the same column span as b, via thin QR.

    Raises RankDeficiencyError when a QR pivot falls below RANK_PIVOT_RTOL
    times the corresponding input column norm.
    """
    b = check_matrix(b, "basis")
    d, k = b.shape
    if k > d:
        raise ValueError(f"cannot orthonormalize {k} columns in dimension {d}")
    q, r = np.linalg.qr(b)
    col_norms = np.linalg.norm(b, axis=0)
    pivots = np.abs(np.diag(r))
    bad = pivots <= RANK_PIVOT_RTOL * np.maximum(col_norms, np.finfo(float).tiny)
    if np.any(bad):
        cols = np.nonzero(bad)[0].tolist()
        raise RankDeficiencyError(f"columns {cols} are numerically dependent")
    return q


def check_basis(u, name: str = "basis") -> np.ndarray:
    """Validate a d x k matrix with orthonormal columns (1 <= k <= d)."""
    u = check_matrix(u, name)
    d, k = u.shape
    if not 1 <= k <= d:
        raise ValueError(f"{name} must satisfy 1 <= rank <= ambient dim, got shape {u.shape}")
    gram_err = frobenius_norm(u.T @ u - np.eye(k))
    if gram_err > 1e-8:
        raise ValueError(f"{name} columns are not orthonormal (||U'U - I||_F = {gram_err:.3e})")
    return u


def sqrt_clamped(value: float) -> float:
    """sqrt of a possibly slightly negative round-off value."""
    return math.sqrt(value) if value > 0.0 else 0.0
