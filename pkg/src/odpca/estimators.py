"""scikit-learn style transformers wrapping the aggregation core.

All four estimators fit an orthonormal basis of the leading eigenspace of
(already centered) data and expose it through the sklearn ``components_``
convention (one component per row). ``transform`` projects onto the fitted
basis; ``inverse_transform`` lifts projected coordinates back.

The distributed estimators simulate a star topology by splitting the input
rows into contiguous equal node blocks, matching the harness's batch grid.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import aggregation
from .datasets import partition_stream
from .linalg import top_k_eig


def split_nodes(x: np.ndarray, n_nodes: int) -> list[np.ndarray]:
    """Contiguous equal row blocks, one per node."""
    n = x.shape[0]
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    if n % n_nodes:
        raise ValueError(f"{n} rows cannot be split evenly across {n_nodes} nodes")
    size = n // n_nodes
    return [x[i * size : (i + 1) * size] for i in range(n_nodes)]


class _BasisTransformer(TransformerMixin, BaseEstimator):
    """Shared transform/inverse_transform over a fitted components_ matrix."""

    def _check_params(self):
        if self.n_components < 1:
            raise ValueError(f"n_components must be >= 1, got {self.n_components}")

    def _validate(self, X, reset: bool) -> np.ndarray:
        X = check_array(X, dtype=float)
        if reset:
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but the estimator was fitted with "
                f"{self.n_features_in_}"
            )
        return X

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = self._validate(X, reset=False)
        return X @ self.components_.T

    def inverse_transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=float)
        return X @ self.components_


class FullPCA(_BasisTransformer):
    """Pooled principal component analysis (the centralized reference).

    Parameters
    ----------
    n_components : int, default=2
        Rank of the recovered eigenspace.

    Attributes
    ----------
    components_ : ndarray of shape (n_components, n_features)
        Leading eigenvectors of the pooled second-moment matrix, one per row.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        self._check_params()
        X = self._validate(X, reset=True)
        self.components_ = aggregation.full_pca(X, self.n_components).T
        return self


class DistributedPCA(_BasisTransformer):
    """One-shot distributed PCA over a simulated star topology.

    ``fit`` splits the rows into ``n_nodes`` contiguous equal blocks, computes
    each node's top (n_components + surplus) eigenvectors, and keeps the top
    n_components eigenvectors of the averaged projectors.

    Parameters
    ----------
    n_components : int, default=2
    n_nodes : int, default=1
        Number of simulated local nodes.
    surplus : int, default=0
        Extra eigenvectors each node transmits (the projection dimension is
        n_components + surplus); aggregation still truncates to n_components.
    """

    def __init__(self, n_components=2, n_nodes=1, surplus=0):
        self.n_components = n_components
        self.n_nodes = n_nodes
        self.surplus = surplus

    def fit(self, X, y=None):
        self._check_params()
        if self.surplus < 0:
            raise ValueError(f"surplus must be >= 0, got {self.surplus}")
        X = self._validate(X, reset=True)
        batches = split_nodes(X, self.n_nodes)
        basis = aggregation.dpca(batches, self.n_components, self.n_components + self.surplus)
        self.components_ = basis.T
        return self


class OnlineDistributedPCA(_BasisTransformer):
    """Streaming two-level aggregation over a simulated star topology.

    Each round -- one ``partial_fit`` call, or one of ``horizon`` contiguous
    slices of ``fit``'s input -- is split across ``n_nodes`` nodes. Per-node
    bases are averaged into a round estimate whose projector enters a global
    accumulator with weight 1/horizon; the leading eigenvectors of the
    accumulator form the estimate.

    Parameters
    ----------
    n_components : int, default=2
    n_nodes : int, default=1
    horizon : int, default=1
        Number of streaming rounds the accumulator is normalized by.
    surplus : int, default=0
        Extra per-node eigenvectors (projection dimension n_components + surplus).

    Attributes
    ----------
    components_ : ndarray of shape (n_components, n_features)
        Leading eigenvectors of the accumulator over the rounds seen so far.
    round_ : int
        Completed rounds.
    """

    def __init__(self, n_components=2, n_nodes=1, horizon=1, surplus=0):
        self.n_components = n_components
        self.n_nodes = n_nodes
        self.horizon = horizon
        self.surplus = surplus

    def _check_stream_params(self):
        self._check_params()
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.surplus < 0:
            raise ValueError(f"surplus must be >= 0, got {self.surplus}")

    def partial_fit(self, X, y=None):
        self._check_stream_params()
        first = not hasattr(self, "_state")
        X = self._validate(X, reset=first)
        if first:
            self._state = aggregation.odpca_init(X.shape[1], self.n_components, self.horizon)
        batches = split_nodes(X, self.n_nodes)
        self._state, round_basis = aggregation.odpca_step(
            self._state, batches, self.n_components + self.surplus
        )
        self.round_ = self._state.round
        self.last_round_basis_ = round_basis
        if self._state.round == self._state.horizon:
            self.components_ = aggregation.odpca_finalize(self._state).T
        else:
            # interim estimate over the rounds seen so far
            _, basis = top_k_eig(self._state.accumulator, self.n_components)
            self.components_ = basis.T
        return self

    def fit(self, X, y=None):
        self._check_stream_params()
        X = self._validate(X, reset=True)
        for attr in ("_state", "round_", "last_round_basis_", "components_"):
            if hasattr(self, attr):
                delattr(self, attr)
        cells = self.n_nodes * self.horizon
        if X.shape[0] % cells:
            raise ValueError(
                f"{X.shape[0]} rows cannot be split evenly into "
                f"{self.horizon} rounds x {self.n_nodes} nodes"
            )
        grid = partition_stream(X, self.n_nodes, X.shape[0] // cells, self.horizon)
        self._state = aggregation.odpca_init(X.shape[1], self.n_components, self.horizon)
        for round_batches in grid:
            self._state, round_basis = aggregation.odpca_step(
                self._state, round_batches, self.n_components + self.surplus
            )
        self.round_ = self._state.round
        self.last_round_basis_ = round_basis
        self.components_ = aggregation.odpca_finalize(self._state).T
        return self


class AllEigenvectorsBaseline(_BasisTransformer):
    """Full-spectrum transfer baseline.

    Every node ships its complete eigendecomposition (d eigenvalues plus d x d
    eigenvectors); the center rebuilds the exact average covariance and keeps
    its top n_components eigenvectors. With equal node blocks this equals
    pooled PCA up to round-off.
    """

    def __init__(self, n_components=2, n_nodes=1):
        self.n_components = n_components
        self.n_nodes = n_nodes

    def fit(self, X, y=None):
        self._check_params()
        X = self._validate(X, reset=True)
        batches = split_nodes(X, self.n_nodes)
        basis = aggregation.baseline_all_eigenvectors(batches, self.n_components)
        self.components_ = basis.T
        return self
