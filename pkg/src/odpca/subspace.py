"""Subspace geometry: projection distance, the dispersion objective its
minimizer solves, mean projectors, and spectrum summary statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IdentifiabilityError
from .linalg import sqrt_clamped, symmetrize


def projection_distance(u, v) -> float:
    """Frobenius distance between the orthogonal projectors onto span(u), span(v).

    Uses the identity ||UU' - VV'||_F^2 = rank(U) + rank(V) - 2 ||U'V||_F^2,
    rearranged into the mutual projection residuals

        ||U - V(V'U)||_F^2 + ||V - U(U'V)||_F^2

    which is the same quantity but immune to the catastrophic cancellation the
    raw form suffers for nearby subspaces. Costs O(d k^2); never materializes
    a d x d projector. Ranks may differ; ambient dimensions must match.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 2 or v.ndim != 2:
        raise ValueError("bases must be 2-D arrays")
    if u.shape[0] != v.shape[0]:
        raise ValueError(f"ambient dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    cross = u.T @ v
    resid_u = u - v @ cross.T
    resid_v = v - u @ cross
    sq = float(np.sum(resid_u * resid_u)) + float(np.sum(resid_v * resid_v))
    return sqrt_clamped(sq)


def h_objective(u, bases: Sequence[np.ndarray]) -> float:
    """Mean squared projection distance from u to each basis in the collection.

    Accumulates left to right with compensated (Kahan) summation so the result
    does not depend on the platform's reduction order.
    """
    if len(bases) == 0:
        raise ValueError("bases must be non-empty")
    total = 0.0
    comp = 0.0
    for b in bases:
        term = projection_distance(u, b) ** 2
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total / len(bases)


def mean_projector(bases: Sequence[np.ndarray]) -> np.ndarray:
    """Average of the orthogonal projectors U U' over the collection.

    Symmetric PSD by construction; its trace equals the mean of the ranks.
    """
    if len(bases) == 0:
        raise ValueError("bases must be non-empty")
    first = np.asarray(bases[0], dtype=float)
    d = first.shape[0]
    acc = np.zeros((d, d))
    for b in bases:
        b = np.asarray(b, dtype=float)
        if b.ndim != 2 or b.shape[0] != d:
            raise ValueError("ambient dimension mismatch in basis collection")
        acc += b @ b.T
    return symmetrize(acc / len(bases))


@dataclass(frozen=True)
class SpectrumStats:
    """Summary of a descending covariance spectrum at a target rank.

    eigengap = lambda_k - lambda_k1 (positivity makes the leading eigenspace
    identifiable), kappa = lambda1 / eigengap, effective_rank = trace / lambda1.
    """

    lambda1: float
    lambda_k: float
    lambda_k1: float
    eigengap: float
    kappa: float
    effective_rank: float


def spectrum_stats(values, k: int) -> SpectrumStats:
    """Compute SpectrumStats for a descending spectrum at rank k.

    Raises IdentifiabilityError when the eigengap at k is not positive.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1:
        raise ValueError("values must be a 1-D spectrum")
    if k < 1 or k + 1 > vals.size:
        raise ValueError(f"need at least k+1 = {k + 1} eigenvalues, got {vals.size}")
    scale = 1.0 + float(np.abs(vals).max())
    if np.any(np.diff(vals) > 1e-12 * scale):
        raise ValueError("values must be sorted in descending order")
    lambda1 = float(vals[0])
    if lambda1 <= 0.0:
        raise ValueError("leading eigenvalue must be positive")
    lambda_k = float(vals[k - 1])
    lambda_k1 = float(vals[k])
    gap = lambda_k - lambda_k1
    if gap <= 0.0:
        raise IdentifiabilityError(
            f"eigengap at rank {k} is {gap:.3e}; the leading eigenspace is not identifiable"
        )
    effective_rank = float(vals.sum()) / lambda1
    if effective_rank < 1.0 - 1e-12:
        raise ValueError("spectrum has negative mass: effective rank below 1")
    return SpectrumStats(lambda1, lambda_k, lambda_k1, gap, lambda1 / gap, effective_rank)
