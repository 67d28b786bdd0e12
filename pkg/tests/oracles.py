"""Independent oracles used to cross-check the library.

None of these call an eigensolver from numpy/scipy: eigenvalues come from
bisection on the characteristic polynomial of a Householder tridiagonal
reduction (evaluated through the classic Sturm sign-count recurrence), and
subspace distances are recomputed from dense projectors.
"""

import numpy as np


def tridiagonalize(a):
    """Householder reduction to symmetric tridiagonal form (same spectrum)."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k].copy()
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(norm_x, x[0] if x[0] != 0 else 1.0)
        v_norm = np.linalg.norm(v)
        if v_norm < np.finfo(float).tiny:
            continue
        v /= v_norm
        p = np.eye(n - k - 1) - 2.0 * np.outer(v, v)
        a[k + 1 :, k + 1 :] = p @ a[k + 1 :, k + 1 :] @ p
        a[k + 1 :, k] = p @ a[k + 1 :, k]
        a[k, k + 1 :] = a[k + 1 :, k]
    diag = np.diag(a).copy()
    off = np.diag(a, 1).copy() if n > 1 else np.zeros(0)
    return diag, off


def _count_below(diag, off, x):
    """Number of eigenvalues strictly below x (Sturm sign agreement count)."""
    count = 0
    q = 1.0
    for i in range(len(diag)):
        e2 = off[i - 1] ** 2 if i > 0 else 0.0
        denom = q if q != 0.0 else 1e-300
        q = (diag[i] - x) - e2 / denom
        if q < 0.0:
            count += 1
    return count


def bisection_eigenvalues(a, tol=1e-12, max_iter=200):
    """All eigenvalues of a symmetric matrix, descending, via bisection."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0]])
    diag, off = tridiagonalize(a)
    radius = np.zeros(n)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo0 = float(np.min(diag - radius)) - 1.0
    hi0 = float(np.max(diag + radius)) + 1.0
    scale = max(abs(lo0), abs(hi0), 1.0)
    eigs = []
    for j in range(n):  # j-th smallest
        lo, hi = lo0, hi0
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if _count_below(diag, off, mid) <= j:
                lo = mid
            else:
                hi = mid
            if hi - lo <= tol * scale:
                break
        eigs.append(0.5 * (lo + hi))
    return np.array(eigs)[::-1]


def dense_projection_distance(u, v):
    """||UU' - VV'||_F with the projectors materialized."""
    pu = u @ u.T
    pv = v @ v.T
    return float(np.linalg.norm(pu - pv))


def naive_covariance(x):
    """Triple-loop second-moment accumulation."""
    n, d = x.shape
    cov = np.zeros((d, d))
    for i in range(n):
        for a in range(d):
            for b in range(d):
                cov[a, b] += x[i, a] * x[i, b]
    return cov / n


def grid_unit_vectors(d, count):
    """Deterministic quasi-uniform unit vectors: an angle grid in the plane,
    a Fibonacci sphere in 3-D."""
    if d == 2:
        angles = np.linspace(0.0, np.pi, count, endpoint=False)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    if d == 3:
        i = np.arange(count) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / count)
        theta = np.pi * (1.0 + np.sqrt(5.0)) * i
        return np.stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
            axis=1,
        )
    raise ValueError(f"grid only supports d in (2, 3), got {d}")


def exhaustive_two_partition_cost(points):
    """Optimal 2-means cost by enumerating every nonempty bipartition."""
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):  # fix point 0 in cluster A to kill symmetry
        members = [(mask >> i) & 1 for i in range(n - 1)]
        a_idx = [0] + [i + 1 for i, m in enumerate(members) if m == 0]
        b_idx = [i + 1 for i, m in enumerate(members) if m == 1]
        if not b_idx:
            continue
        cost = 0.0
        for idx in (a_idx, b_idx):
            sub = x[idx]
            mu = sub.mean(axis=0)
            cost += float(np.sum((sub - mu) ** 2))
        best = min(best, cost)
    return best


def random_basis(rng, d, k):
    """Haar-ish orthonormal d x k basis from a generator."""
    q, _ = np.linalg.qr(rng.standard_normal((d, k)))
    return q
