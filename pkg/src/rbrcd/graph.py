"""Sparse undirected graphs: CSR storage, edge-list ingestion, degrees.

The modularity cost matrix ``C = -(A - lam * d d^T)`` is never built; every
consumer works from the CSR adjacency, the degree vector and ``lam``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for unusable graph input."""


class EdgeListFormatError(GraphError):
    def __init__(self, path, lineno: int, line: str, reason: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}: {line.rstrip()!r}")


class EmptyGraphError(GraphError):
    """The graph has no edges, so ``lam = 1/||d||_1`` is undefined."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected 0/1 graph in CSR form.

    ``node_ids[i]`` is the original identifier of internal node ``i``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    d: np.ndarray
    total_degree: float
    lam: float
    node_ids: np.ndarray = field(repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def isolated(self) -> np.ndarray:
        return np.flatnonzero(self.d == 0)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def dense_adjacency(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as an ``(m, 2)`` array with ``u < v``."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])


def degrees_and_lambda(g: Graph) -> tuple[np.ndarray, float]:
    return g.d, g.lam


def from_edges(n: int, u, v, node_ids=None, dedup: bool = True) -> Graph:
    """Build a graph on nodes ``0..n-1`` from endpoint arrays.

    Self-loops are dropped and the adjacency is symmetrized. Repeated
    undirected edges are collapsed when ``dedup`` is set, otherwise they
    raise :class:`GraphError`.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.shape != v.shape:
        raise GraphError("endpoint arrays differ in length")
    if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
        raise GraphError("node index out of range")
    keep = u != v
    u, v = u[keep], v[keep]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = lo * n + hi
    uniq = np.unique(keys)
    if len(uniq) != len(keys) and not dedup:
        raise GraphError(f"{len(keys) - len(uniq)} duplicate edge(s); load with dedup to collapse them")
    if len(uniq) == 0:
        raise EmptyGraphError("graph has no edges")
    lo, hi = uniq // n, uniq % n

    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])

    d = counts.astype(np.float64)
    total = float(d.sum())
    if node_ids is None:
        node_ids = np.arange(n)
    return Graph(
        n=n,
        indptr=indptr,
        indices=cols.astype(np.int64),
        d=d,
        total_degree=total,
        lam=1.0 / total,
        node_ids=np.asarray(node_ids),
    )


def from_dense(A) -> Graph:
    A = np.asarray(A)
    i, j = np.nonzero(np.triu(A, 1))
    return from_edges(A.shape[0], i, j)


def load_edge_list(path, dedup: bool = True) -> Graph:
    """Read a whitespace-separated ``u v`` edge list with ``#`` comments.

    Node identifiers are remapped to ``0..n-1`` in increasing order of the
    original integer ids; ``Graph.node_ids`` keeps the inverse map. Nodes that
    only occur on self-loop lines are kept as isolated nodes.
    """
    us, vs = [], []
    try:
        fh = open(path)
    except OSError as exc:
        raise GraphError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) == 3:
                raise EdgeListFormatError(path, lineno, line, "weighted edges are not supported")
            if len(parts) != 2:
                raise EdgeListFormatError(path, lineno, line, "expected two node ids")
            try:
                us.append(int(parts[0]))
                vs.append(int(parts[1]))
            except ValueError:
                raise EdgeListFormatError(path, lineno, line, "node ids must be integers") from None
    if not us:
        raise EmptyGraphError(f"{path}: no edges")
    raw = np.concatenate([np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)])
    node_ids, inv = np.unique(raw, return_inverse=True)
    m = len(us)
    return from_edges(len(node_ids), inv[:m], inv[m:], node_ids=node_ids, dedup=dedup)


def write_edge_list(g: Graph, path) -> None:
    """Write ``g`` with original ids. Isolated nodes are emitted as self-loop
    lines so that reloading recovers the same node set."""
    ids = g.node_ids
    e = g.edges()
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(f"# undirected graph: {g.n} nodes, {g.n_edges} edges\n")
        if len(g.isolated):
            fh.write("# self-loop lines below mark isolated nodes\n")
        for a, b in zip(ids[e[:, 0]], ids[e[:, 1]]):
            fh.write(f"{a} {b}\n")
        for i in g.isolated:
            fh.write(f"{ids[i]} {ids[i]}\n")
    os.replace(tmp, path)
