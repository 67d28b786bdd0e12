"""Downstream evaluations: rank-k reconstruction error and Lloyd k-means on
projected data.

Clustering costs are always scored in the original space by lifting centers
back through the basis (center -> U @ center), so costs obtained under
different bases are commensurable. Because lifted centers live inside the
basis span, assignments computed in projected coordinates are already the
original-space nearest-center assignments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datagen import SeededStream
from .linalg import check_matrix, sqrt_clamped


def project_data(x, basis) -> np.ndarray:
    """Coordinates of the rows of x in the basis: X @ U."""
    x = check_matrix(x, "data")
    basis = check_matrix(basis, "basis")
    if x.shape[1] != basis.shape[0]:
        raise ValueError(f"data has {x.shape[1]} columns, basis ambient dim is {basis.shape[0]}")
    return x @ basis


def lowrank_error(x, basis) -> float:
    """Residual ||X - X U U'||_F via sqrt(||X||_F^2 - ||XU||_F^2).

    The identity holds because XUU' is the orthogonal projection of the rows
    onto span(U); round-off negatives are clamped to zero.
    """
    y = project_data(x, basis)
    x = np.asarray(x, dtype=float)
    return sqrt_clamped(float(np.sum(x * x)) - float(np.sum(y * y)))


def relative_error(method_err: float, baseline_err: float) -> float:
    """Ratio method/baseline.

    When the baseline is the optimal pooled rank-k basis the ratio cannot
    drop below 1 beyond round-off (Eckart-Young).
    """
    if baseline_err <= 0.0:
        raise ValueError("baseline error must be positive; the task is degenerate")
    return method_err / baseline_err


@dataclass
class ClusteringResult:
    """Lloyd output: centers, assignments, final cost, and the cost trace.

    cost_history records the cost after each assignment phase; it is
    non-increasing by construction.
    """

    centers: np.ndarray
    assignments: np.ndarray
    cost: float
    iterations: int
    cost_history: list[float]


def _pairwise_sq(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.sum(diff * diff, axis=2)


def _kmeans_pp_init(x: np.ndarray, k: int, stream: SeededStream) -> np.ndarray:
    """Classic D^2-weighted seeding driven by the shared counter stream."""
    n = x.shape[0]
    first = int(stream.random(1)[0] * n)
    centers = [x[first]]
    closest = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            # every point coincides with a center already; take the lowest
            # index not yet chosen to stay deterministic
            taken = {int(np.flatnonzero((x == c).all(axis=1))[0]) for c in centers}
            idx = next((i for i in range(n) if i not in taken), 0)
        else:
            u = float(stream.random(1)[0]) * total
            idx = int(np.searchsorted(np.cumsum(closest), u, side="right"))
            idx = min(idx, n - 1)
        centers.append(x[idx])
        closest = np.minimum(closest, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers, dtype=float)


def _lloyd_from(x: np.ndarray, centers: np.ndarray, max_iters: int) -> ClusteringResult:
    """Lloyd iterations from explicit initial centers to an assignment fixpoint.

    Empty clusters are reseeded to the point farthest from its assigned
    center (strictly decreasing the cost), ties broken by lowest index.
    """
    n, _ = x.shape
    k = centers.shape[0]
    centers = np.array(centers, dtype=float, copy=True)
    prev_assign: np.ndarray | None = None
    cost_history: list[float] = []
    result_centers = centers
    result_assign = np.zeros(n, dtype=int)
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        d2 = _pairwise_sq(x, centers)
        assign = d2.argmin(axis=1)
        for _guard in range(k):
            counts = np.bincount(assign, minlength=k)
            empty = np.flatnonzero(counts == 0)
            if empty.size == 0:
                break
            j = int(empty[0])
            own = d2[np.arange(n), assign]
            far = int(np.argmax(own))
            centers[j] = x[far]
            d2[:, j] = np.sum((x - centers[j]) ** 2, axis=1)
            assign = d2.argmin(axis=1)
        cost = float(d2[np.arange(n), assign].sum())
        cost_history.append(cost)
        result_centers = centers.copy()
        result_assign = assign
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        for j in range(k):
            members = x[assign == j]
            if members.shape[0]:
                centers[j] = members.mean(axis=0)
    return ClusteringResult(result_centers, result_assign, cost_history[-1], iterations, cost_history)


def kmeans_lloyd(points, k: int, seed: int = 0, max_iters: int = 100) -> ClusteringResult:
    """Lloyd's method from k-means++ seeding, run to an assignment fixpoint."""
    x = check_matrix(points, "points")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if x.shape[0] < k:
        raise ValueError(f"need at least k = {k} points, got {x.shape[0]}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    stream = SeededStream(seed)
    centers = _kmeans_pp_init(x, k, stream)
    return _lloyd_from(x, centers, max_iters)


def projected_clustering_cost(x, basis, k: int, seed: int, max_iters: int = 100) -> float:
    """Cluster the projected rows, lift centers back, and score in the
    original space."""
    y = project_data(x, basis)
    result = kmeans_lloyd(y, k, seed, max_iters)
    lifted = result.centers @ np.asarray(basis, dtype=float).T
    diffs = np.asarray(x, dtype=float) - lifted[result.assignments]
    return float(np.sum(diffs * diffs))


def clustering_cost_ratio(
    method_basis,
    baseline_basis,
    x,
    k: int,
    seeds: Sequence[int],
    max_iters: int = 100,
) -> float:
    """Median over seeds of cost(method projection) / cost(baseline projection)."""
    if len(seeds) == 0:
        raise ValueError("need at least one clustering seed")
    ratios = []
    for seed in seeds:
        cost_m = projected_clustering_cost(x, method_basis, k, seed, max_iters)
        cost_b = projected_clustering_cost(x, baseline_basis, k, seed, max_iters)
        if cost_b <= 0.0:
            raise ValueError("baseline clustering cost is zero; ratio undefined")
        ratios.append(cost_m / cost_b)
    return float(np.median(ratios))
