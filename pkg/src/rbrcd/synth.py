"""Planted-partition benchmark graphs (SBM and degree-corrected SBM).

All randomness comes from ``numpy.random.Generator(PCG64(seed))`` so a
``(config, seed)`` pair always produces the same graph.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .graph import Graph, from_edges, write_edge_list


@dataclass(frozen=True)
class SynthConfig:
    k: int
    m: int
    q: float
    alpha: float = 1.4
    ratio: float = 0.3
    seed: int = 0
    degree_corrected: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must lie in (0, 1], got {self.ratio}")
        if self.degree_corrected and not self.alpha > 1.0:
            raise ValueError(f"Pareto shape alpha must be > 1 so that E[theta] = 1 is attainable, got {self.alpha}")

    @property
    def n(self) -> int:
        return self.m * self.k

    def block_matrix(self) -> np.ndarray:
        B = np.full((self.k, self.k), self.ratio * self.q)
        np.fill_diagonal(B, self.q)
        return B


@dataclass(frozen=True)
class GroundTruth:
    labels: np.ndarray
    theta: np.ndarray


def pareto_scale(alpha: float) -> float:
    # mean of Pareto(alpha, beta) is alpha*beta/(alpha-1); pin it to 1
    return (alpha - 1.0) / alpha


def sample_pareto_theta(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` i.i.d. Pareto(alpha, beta) values with unit mean."""
    if not alpha > 1.0:
        raise ValueError(f"alpha must be > 1, got {alpha}")
    beta = pareto_scale(alpha)
    return beta * (1.0 + rng.pareto(alpha, size))


def _sample_truth(cfg: SynthConfig, rng):
    labels = np.repeat(np.arange(cfg.k), cfg.m)
    if cfg.degree_corrected:
        theta = sample_pareto_theta(cfg.alpha, cfg.n, rng)
    else:
        theta = np.ones(cfg.n)
    return GroundTruth(labels=labels, theta=theta)


def edge_probabilities(cfg: SynthConfig, truth: GroundTruth, rows=slice(None)) -> np.ndarray:
    B = cfg.block_matrix()
    t = truth.theta
    return np.minimum(1.0, np.outer(t[rows], t) * B[truth.labels[rows]][:, truth.labels])


def expected_edges(cfg: SynthConfig, truth: GroundTruth) -> float:
    P = edge_probabilities(cfg, truth)
    return float(np.triu(P, 1).sum())


def generate_dcsbm(cfg: SynthConfig, chunk: int = 512) -> tuple[Graph, GroundTruth]:
    """Sample every pair ``i < j`` independently with probability
    ``min(1, theta_i theta_j B[a, b])``.

    Quadratic in ``n``; rows are processed in chunks to bound memory.
    Raises :class:`~rbrcd.graph.EmptyGraphError` if no edge is drawn.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    truth = _sample_truth(cfg, rng)
    n = cfg.n
    us, vs = [], []
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        P = edge_probabilities(cfg, truth, slice(lo, hi))
        hit = rng.random(P.shape) < P
        hit &= np.arange(n)[None, :] > np.arange(lo, hi)[:, None]
        i, j = np.nonzero(hit)
        us.append(i + lo)
        vs.append(j)
    g = from_edges(n, np.concatenate(us), np.concatenate(vs))
    return g, truth


def _unrank_pairs(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ranks ``t = r(r-1)/2 + c`` (``c < r``) back to ``(r, c)``."""
    r = ((1.0 + np.sqrt(1.0 + 8.0 * t.astype(np.float64))) / 2.0).astype(np.int64)
    # float rounding can be off by one either way
    r -= (r * (r - 1) // 2) > t
    r += ((r + 1) * r // 2) <= t
    return r, t - r * (r - 1) // 2


def generate_sbm_sparse(k: int, m: int, p_in: float, p_out: float, seed: int = 0) -> tuple[Graph, GroundTruth]:
    """Exact planted-partition SBM sampler for large sparse graphs.

    For each block pair the edge count is drawn from its binomial law and the
    edges are then a uniform subset of that block's pairs, which gives the
    same distribution as independent Bernoulli trials without the ``n^2``
    cost.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    us, vs = [], []
    for a in range(k):
        for b in range(a, k):
            if a == b:
                total, prob = m * (m - 1) // 2, p_in
            else:
                total, prob = m * m, p_out
            cnt = rng.binomial(total, prob)
            if cnt == 0:
                continue
            t = rng.choice(total, size=cnt, replace=False)
            if a == b:
                r, c = _unrank_pairs(t)
                us.append(a * m + r)
                vs.append(a * m + c)
            else:
                us.append(a * m + t // m)
                vs.append(b * m + t % m)
    g = from_edges(k * m, np.concatenate(us), np.concatenate(vs))
    return g, GroundTruth(labels=np.repeat(np.arange(k), m), theta=np.ones(k * m))


def write_labels(path, node_ids, labels) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        for node, lab in zip(node_ids, labels):
            fh.write(f"{node} {lab}\n")
    os.replace(tmp, path)


def read_labels(path, g: Graph) -> np.ndarray:
    """Read a ``node label`` file and align it with ``g``'s internal order."""
    index = {int(v): i for i, v in enumerate(g.node_ids)}
    labels = np.full(g.n, -1, dtype=np.int64)
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'node label'")
            node, lab = int(parts[0]), int(parts[1])
            if node not in index:
                raise ValueError(f"{path}:{lineno}: node {node} is not in the graph")
            labels[index[node]] = lab
    missing = np.flatnonzero(labels < 0)
    if len(missing):
        raise ValueError(f"{path}: {len(missing)} graph node(s) have no label, e.g. {g.node_ids[missing[0]]}")
    return labels


def save_synthetic(prefix, g: Graph, truth: GroundTruth) -> tuple[str, str]:
    edges, labels = f"{prefix}.edges", f"{prefix}.truth"
    write_edge_list(g, edges)
    write_labels(labels, g.node_ids, truth.labels)
    return edges, labels


__all__ = [
    "SynthConfig",
    "GroundTruth",
    "pareto_scale",
    "sample_pareto_theta",
    "edge_probabilities",
    "expected_edges",
    "generate_dcsbm",
    "generate_sbm_sparse",
    "write_labels",
    "read_labels",
    "save_synthetic",
]
