"""Turn a factor ``U`` into hard communities: direct rounding, K-means on
the rows of ``U``, or degree-weighted K-means."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray
    k0: int

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Compact arbitrary labels to ``0..k0-1`` (in increasing label order)."""
        uniq, inv = np.unique(np.asarray(labels), return_inverse=True)
        return cls(inv.astype(np.int64), len(uniq))

    @property
    def n(self) -> int:
        return len(self.labels)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k0)


def recover_rounding(U) -> Partition:
    """Label each node by the column of its largest entry."""
    return Partition.from_labels(K.row_argmax(U.cols, U.vals))


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    objective: float
    history: list


def _weighted_sq_dist(X, centers):
    d2 = (X * X).sum(1)[:, None] - 2.0 * X @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d2, 0.0)


def _plusplus(X, w, k, rng):
    n = len(X)
    centers = np.empty((k, X.shape[1]))
    p0 = w / w.sum() if w.sum() > 0 else None
    centers[0] = X[rng.choice(n, p=p0)]
    closest = ((X - centers[0]) ** 2).sum(1)
    for c in range(1, k):
        score = w * closest
        tot = score.sum()
        i = rng.choice(n, p=score / tot) if tot > 0 else rng.integers(n)
        centers[c] = X[i]
        closest = np.minimum(closest, ((X - centers[c]) ** 2).sum(1))
    return centers


def lloyd(X, k: int, weights=None, rng=None, max_iter: int = 100, tol: float = 1e-8) -> KMeansResult:
    """Weighted Lloyd iterations from a k-means++ start.

    Minimizes ``sum_i w_i ||x_i - c_{l(i)}||^2``. ``history`` holds the
    objective after every assignment and every center update; it never
    increases. An empty cluster is re-seeded at the point currently paying
    the largest cost.
    """
    rng = np.random.default_rng(rng)
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    centers = _plusplus(X, w, k, rng)
    history = []
    labels = None
    for _ in range(max_iter):
        D = _weighted_sq_dist(X, centers)
        labels = D.argmin(1)
        cost = w * D[np.arange(n), labels]
        history.append(float(cost.sum()))
        new = centers.copy()
        counts = np.bincount(labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            far = int(np.argmax(cost))
            labels[far] = c
            cost[far] = 0.0
            new[c] = X[far]
        wsum = np.bincount(labels, weights=w, minlength=k)
        for c in np.flatnonzero(wsum > 0):
            m = labels == c
            new[c] = (w[m, None] * X[m]).sum(0) / wsum[c]
        move = float(((new - centers) ** 2).sum(1).max())
        centers = new
        history.append(float((w * ((X - centers[labels]) ** 2).sum(1)).sum()))
        if move < tol:
            break
    return KMeansResult(labels, centers, history[-1], history)


def kmeans(X, k: int, weights=None, rng=None, n_init: int = 5, **kw) -> KMeansResult:
    rng = np.random.default_rng(rng)
    best = None
    for _ in range(n_init):
        res = lloyd(X, k, weights, rng, **kw)
        if best is None or res.objective < best.objective:
            best = res
    return best


def recover_kmeans(U, k: int, weights=None, rng=None, n_init: int = 5) -> Partition:
    """K-means on the rows of ``U``.

    With ``weights=d`` this solves ``min ||D (Phi X_c - U)||_F^2``, i.e. each
    row's squared residual is scaled by ``d_i^2``.
    """
    X = U.to_dense() if hasattr(U, "to_dense") else np.asarray(U, dtype=np.float64)
    if k > len(X):
        raise ValueError(f"k={k} exceeds the number of rows {len(X)}")
    w = None
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if len(w) != len(X) or np.any(w < 0):
            raise ValueError("weights must be a nonnegative vector with one entry per row")
        w = w ** 2
        if w.max() > 0:
            w = w / w.max()
    res = kmeans(X, k, w, rng, n_init=n_init)
    return Partition.from_labels(res.labels)


def recover(U, scheme: str, d: Optional[np.ndarray] = None, rng=None) -> Partition:
    if scheme == "rounding":
        return recover_rounding(U)
    if scheme == "kmeans":
        return recover_kmeans(U, U.k, rng=rng)
    if scheme == "wkmeans":
        return recover_kmeans(U, U.k, weights=d, rng=rng)
    raise ValueError(f"unknown recovery scheme {scheme!r}")
