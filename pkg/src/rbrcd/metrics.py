"""Partition quality: modularity, cluster coefficient, strength, and
misclassification against a planted truth."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from numba import njit

from .cluster import Partition
from .graph import EmptyGraphError, Graph


def _labels(part) -> np.ndarray:
    return part.labels if isinstance(part, Partition) else np.asarray(part)


def _check(g: Graph, labels):
    if len(labels) != g.n:
        raise ValueError(f"partition covers {len(labels)} nodes, graph has {g.n}")


def modularity(g: Graph, part) -> float:
    """``Q = sum_c [e_c/|E| - (D_c / 2|E|)^2]`` in ``O(|E| + n)``."""
    labels = _labels(part)
    _check(g, labels)
    if g.n_edges == 0:
        raise EmptyGraphError("modularity is undefined without edges")
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    same = labels[src] == labels[g.indices]
    k = int(labels.max()) + 1
    # each intra edge is seen from both ends
    e_in = np.bincount(labels[src[same]], minlength=k) / 2.0
    D = np.bincount(labels, weights=g.d, minlength=k)
    m = g.n_edges
    return float((e_in / m).sum() - ((D / (2.0 * m)) ** 2).sum())


@njit(cache=True)
def _local_triangles(indptr, indices, labels):
    # per node v: edges between pairs of v's neighbors that share v's label
    n = len(indptr) - 1
    mark = np.zeros(n, dtype=np.bool_)
    out = np.zeros(n)
    for v in range(n):
        lv = labels[v]
        for e in range(indptr[v], indptr[v + 1]):
            t = indices[e]
            if labels[t] == lv:
                mark[t] = True
        cnt = 0
        for e in range(indptr[v], indptr[v + 1]):
            t = indices[e]
            if not mark[t]:
                continue
            for f in range(indptr[t], indptr[t + 1]):
                s = indices[f]
                if s > t and mark[s]:
                    cnt += 1
        out[v] = cnt
        for e in range(indptr[v], indptr[v + 1]):
            mark[indices[e]] = False
    return out


def cluster_coefficient(g: Graph, part) -> float:
    """Mean over communities of the mean local in-community clustering.

    Nodes of degree < 2 contribute 0 but still count in their community's size.
    """
    labels = _labels(part)
    _check(g, labels)
    tri = _local_triangles(g.indptr, g.indices, labels)
    dd = g.d * (g.d - 1.0)
    local = np.divide(2.0 * tri, dd, out=np.zeros(g.n), where=dd > 0)
    k = int(labels.max()) + 1
    size = np.bincount(labels, minlength=k)
    per = np.bincount(labels, weights=local, minlength=k)
    used = size > 0
    return float((per[used] / size[used]).mean())


def in_out_degrees(g: Graph, labels) -> tuple[np.ndarray, np.ndarray]:
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    same = labels[src] == labels[g.indices]
    d_in = np.bincount(src[same], minlength=g.n).astype(np.float64)
    return d_in, g.d - d_in


def community_scores(g: Graph, part) -> np.ndarray:
    """1 for strong, 0.5 for weak, 0 for invalid communities."""
    labels = _labels(part)
    _check(g, labels)
    d_in, d_out = in_out_degrees(g, labels)
    k = int(labels.max()) + 1
    scores = np.zeros(k)
    used = np.zeros(k, dtype=bool)
    used[labels] = True
    strong = np.ones(k, dtype=bool)
    np.logical_and.at(strong, labels, d_in > d_out)
    sin = np.bincount(labels, weights=d_in, minlength=k)
    sout = np.bincount(labels, weights=d_out, minlength=k)
    scores[sin > sout] = 0.5
    scores[strong] = 1.0
    return scores[used]


def strength(g: Graph, part) -> float:
    return float(community_scores(g, part).mean())


def confusion_matrix(truth, found) -> np.ndarray:
    """``M[a, b] = |C*_a  intersect  C_b|``, true communities on rows."""
    t = _labels(truth)
    f = _labels(found)
    if len(t) != len(f):
        raise ValueError(f"label vectors differ in length: {len(t)} vs {len(f)}")
    M = np.zeros((int(t.max()) + 1, int(f.max()) + 1), dtype=np.int64)
    np.add.at(M, (t, f), 1)
    return M


def misclassification_greedy(M: np.ndarray) -> float:
    # every detected community takes its best-overlapping true community
    return float(1.0 - M.max(axis=0).sum() / M.sum())


def misclassification_exact(M: np.ndarray) -> float:
    """Error under the best one-to-one matching of communities (brute force)."""
    kt, kf = M.shape
    n = M.sum()
    best = 0
    if kt <= kf:
        for perm in itertools.permutations(range(kf), kt):
            best = max(best, M[np.arange(kt), perm].sum())
    else:
        for perm in itertools.permutations(range(kt), kf):
            best = max(best, M[perm, np.arange(kf)].sum())
    return float(1.0 - best / n)


def misclassification(truth, found, exact_limit: int = 8):
    """Return ``(err, confusion, err_exact)``; ``err_exact`` is None when
    either side has more than ``exact_limit`` communities."""
    t = Partition.from_labels(_labels(truth))
    f = Partition.from_labels(_labels(found))
    M = confusion_matrix(t, f)
    exact = misclassification_exact(M) if max(M.shape) <= exact_limit else None
    return misclassification_greedy(M), M, exact


@dataclass
class MetricsReport:
    Q: float
    CC: float
    S: float
    k0: int
    err: Optional[float] = None
    err_exact: Optional[float] = None
    confusion: Optional[np.ndarray] = None
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.confusion is not None:
            out["confusion"] = self.confusion.tolist()
        return {k: v for k, v in out.items() if v is not None}


def evaluate(g: Graph, part, truth=None) -> MetricsReport:
    labels = _labels(part)
    part = Partition.from_labels(labels)
    rep = MetricsReport(
        Q=modularity(g, part),
        CC=cluster_coefficient(g, part),
        S=strength(g, part),
        k0=part.k0,
    )
    if truth is not None:
        rep.err, rep.confusion, rep.err_exact = misclassification(truth, part)
    return rep
