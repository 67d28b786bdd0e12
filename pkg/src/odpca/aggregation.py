"""Eigenspace estimators: pooled PCA, one-shot distributed aggregation, the
streaming two-level variant, and the full-spectrum transfer baseline.

The streaming estimator keeps a global accumulator: after round t it holds
sum_{s <= t} T^-1 Vbar(s) Vbar(s)', a PSD matrix whose trace is exactly
t * K / T. Its top-K eigenvectors at the horizon are the final estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StateError
from .linalg import (
    EigenDecomposition,
    check_matrix,
    empirical_covariance,
    fix_signs,
    sym_eig,
    symmetrize,
    top_k_eig,
)
from .subspace import mean_projector

# Gram-route eigenvalues at or below this fraction of the leading one are
# treated as numerically zero (the batch cannot support that many directions).
_GRAM_RANK_RTOL = 1e-12


def local_top_k(batch, k: int) -> np.ndarray:
    """Top-k eigenvectors of the batch second-moment matrix n^-1 X'X.

    For n < d the n x n Gram matrix X X' / n is decomposed instead and its
    eigenvectors mapped back through X'; the two routes agree on the span
    whenever the requested eigenvalues are nonzero, and the covariance route
    is used as a fallback when they are not.
    """
    x = check_matrix(batch, "batch")
    n, d = x.shape
    if not 1 <= k <= d:
        raise ValueError(f"k must be in [1, {d}], got {k}")
    if n < d and k <= n:
        basis = _gram_top_k(x, k)
        if basis is not None:
            return basis
    _, basis = top_k_eig(empirical_covariance(x), k)
    return basis


def _gram_top_k(x: np.ndarray, k: int) -> np.ndarray | None:
    n = x.shape[0]
    gram = symmetrize(x @ x.T / n)
    w, u = np.linalg.eigh(gram)
    w = w[::-1][:k]
    u = u[:, ::-1][:, :k]
    if w[-1] <= _GRAM_RANK_RTOL * max(w[0], np.finfo(float).tiny):
        return None
    basis = x.T @ (u / np.sqrt(n * w))
    # exact eigenvectors map to an orthonormal set; QR only cleans round-off
    basis, _ = np.linalg.qr(basis)
    return fix_signs(basis)


def aggregate_local(bases: Sequence[np.ndarray], k: int) -> np.ndarray:
    """Top-k eigenvectors of the mean projector m^-1 sum_l U_l U_l'.

    Bases may carry surplus rank (>= k); the result is truncated to k. When
    the stacked factor C = [U_1 .. U_m] / sqrt(m) is thin, the leading
    eigenvectors of C C' are recovered from the small Gram matrix C'C instead
    of assembling the d x d projector.
    """
    if len(bases) == 0:
        raise ValueError("bases must be non-empty")
    mats = [check_matrix(b, "basis") for b in bases]
    d = mats[0].shape[0]
    if any(b.shape[0] != d for b in mats):
        raise ValueError("ambient dimension mismatch across bases")
    min_rank = min(b.shape[1] for b in mats)
    if not 1 <= k <= min_rank:
        raise ValueError(f"k must be in [1, {min_rank}] (the smallest basis rank), got {k}")
    total_rank = sum(b.shape[1] for b in mats)
    if total_rank < d:
        c = np.hstack(mats) / np.sqrt(len(mats))
        gram = symmetrize(c.T @ c)
        w, u = np.linalg.eigh(gram)
        w = w[::-1][:k]
        u = u[:, ::-1][:, :k]
        # every basis contributes projector weight 1/m on its own span, so the
        # k-th eigenvalue is at least 1/m and the division is safe
        basis = c @ (u / np.sqrt(w))
        basis, _ = np.linalg.qr(basis)
        return fix_signs(basis)
    _, basis = top_k_eig(mean_projector(mats), k)
    return basis


@dataclass
class OdpcaState:
    """Global accumulator for the streaming estimator.

    After ``round`` completed rounds the accumulator equals
    sum_{s <= round} horizon^-1 Vbar(s) Vbar(s)'; it is PSD and its trace is
    round * rank / horizon.
    """

    ambient_dim: int
    rank: int
    horizon: int
    round: int
    accumulator: np.ndarray


def odpca_init(d: int, k: int, horizon: int) -> OdpcaState:
    """Fresh state with a zero accumulator at round 0."""
    if not 1 <= k <= d:
        raise ValueError(f"rank must be in [1, {d}], got {k}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    return OdpcaState(d, k, horizon, 0, np.zeros((d, d)))


def odpca_accumulate(state: OdpcaState, round_basis: np.ndarray) -> OdpcaState:
    """Fold one round's aggregate basis into the global accumulator."""
    if state.round >= state.horizon:
        raise StateError(f"all {state.horizon} rounds already consumed")
    round_basis = check_matrix(round_basis, "round basis")
    if round_basis.shape != (state.ambient_dim, state.rank):
        raise ValueError(
            f"round basis must be {state.ambient_dim} x {state.rank}, got {round_basis.shape}"
        )
    acc = symmetrize(state.accumulator + (round_basis @ round_basis.T) / state.horizon)
    return OdpcaState(state.ambient_dim, state.rank, state.horizon, state.round + 1, acc)


def odpca_step(
    state: OdpcaState,
    node_batches: Sequence[np.ndarray],
    projection_rank: int | None = None,
) -> tuple[OdpcaState, np.ndarray]:
    """Consume one round: per-node top-(k+z) bases, local aggregation to rank
    k, and the accumulator update. Returns the new state and the round's
    aggregate basis for per-round error tracking."""
    if state.round >= state.horizon:
        raise StateError(f"all {state.horizon} rounds already consumed")
    if len(node_batches) == 0:
        raise ValueError("need at least one node batch")
    rank = state.rank if projection_rank is None else projection_rank
    if rank < state.rank:
        raise ValueError(f"projection rank {rank} below target rank {state.rank}")
    batches = [check_matrix(b, "batch") for b in node_batches]
    if any(b.shape[1] != state.ambient_dim for b in batches):
        raise ValueError(f"batches must have {state.ambient_dim} columns")
    locals_ = [local_top_k(b, rank) for b in batches]
    round_basis = aggregate_local(locals_, state.rank)
    return odpca_accumulate(state, round_basis), round_basis


def odpca_finalize(state: OdpcaState) -> np.ndarray:
    """Top-k eigenvectors of the accumulator; requires all rounds consumed."""
    if state.round != state.horizon:
        raise StateError(
            f"finalize at round {state.round} of {state.horizon}: stream not exhausted"
        )
    _, basis = top_k_eig(state.accumulator, state.rank)
    return basis


def dpca(
    node_batches: Sequence[np.ndarray],
    k: int,
    projection_rank: int | None = None,
) -> np.ndarray:
    """One-shot distributed PCA: local top-(k+z) bases, then the top-k
    eigenvectors of their mean projector."""
    if len(node_batches) == 0:
        raise ValueError("need at least one node batch")
    rank = k if projection_rank is None else projection_rank
    if rank < k:
        raise ValueError(f"projection rank {rank} below target rank {k}")
    locals_ = [local_top_k(b, rank) for b in node_batches]
    return aggregate_local(locals_, k)


def full_pca(samples, k: int) -> np.ndarray:
    """Top-k eigenvectors of the pooled second-moment matrix."""
    return local_top_k(samples, k)


def node_spectrum(batch) -> EigenDecomposition:
    """Full eigendecomposition of one node's second-moment matrix.

    This is what the full-spectrum baseline transmits: d eigenvalues plus the
    d x d eigenvector matrix, i.e. d (d + 1) real entries per node.
    """
    return sym_eig(empirical_covariance(batch))


def merge_spectra(spectra: Sequence[EigenDecomposition], k: int) -> np.ndarray:
    """Rebuild the average covariance from transmitted spectra and truncate."""
    if len(spectra) == 0:
        raise ValueError("need at least one spectrum")
    d = spectra[0].basis.shape[0]
    recon = np.zeros((d, d))
    for dec in spectra:
        recon += (dec.basis * dec.values) @ dec.basis.T
    _, basis = top_k_eig(symmetrize(recon / len(spectra)), k)
    return basis


def baseline_all_eigenvectors(node_batches: Sequence[np.ndarray], k: int) -> np.ndarray:
    """Full-spectrum transfer baseline.

    Every node ships its complete eigendecomposition and the center rebuilds
    the unweighted average of the per-node covariances before truncating to k.
    That average equals the pooled covariance only for equal batch sizes, so
    unequal sizes are rejected.
    """
    if len(node_batches) == 0:
        raise ValueError("need at least one node batch")
    batches = [check_matrix(b, "batch") for b in node_batches]
    sizes = {b.shape[0] for b in batches}
    if len(sizes) != 1:
        raise ValueError(f"all batches must have equal size, got sizes {sorted(sizes)}")
    dims = {b.shape[1] for b in batches}
    if len(dims) != 1:
        raise ValueError(f"all batches must share ambient dimension, got {sorted(dims)}")
    return merge_spectra([node_spectrum(b) for b in batches], k)
