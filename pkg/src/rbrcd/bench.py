"""Benchmark suites on synthetic planted-partition graphs.

Each suite returns a list of flat dict rows with a fixed column set, ready
for ``csv.DictWriter``.
"""

from __future__ import annotations

import logging
import time
from typing import Optional

import numpy as np

from .graph import Graph
from .metrics import cluster_coefficient, misclassification, strength
from .solver import SolverConfig, best_restart, run_restarts
from .synth import SynthConfig, generate_dcsbm

log = logging.getLogger(__name__)

# (m, k) columns of the synthetic tables: m nodes in each of k communities
TABLE_CONFIGS = [(200, 2), (450, 2), (200, 3), (200, 4)]
TABLE_ALPHA = {"table2": 1.4, "table3": 1.8}
SHAPE_ALPHAS = [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9]
SHAPE_QS = [0.05, 0.1, 0.15, 0.2]
K_GRID = [5, 10, 20, 30, 50, 100, 200]
P_GRID = [1, 2, 5, 10, 20]

# n = 5000 graph with 50 planted communities for the k and p sweeps
SWEEP_GRAPH = dict(k=50, m=100, q=0.2, ratio=0.02, alpha=1.8)

COLUMNS = {
    "table": ["suite", "m", "k", "n", "q", "alpha", "trials", "err_mean", "err_std",
              "err_exact_mean", "Q_mean", "time_mean"],
    "shape-sweep": ["suite", "m", "k", "q", "alpha", "trials", "err_mean", "err_std", "time_mean"],
    "k-sweep": ["suite", "k", "p", "k0", "CC", "S", "Q", "time"],
    "p-sweep": ["suite", "k", "p", "k0", "CC", "S", "Q", "time"],
}
SUITES = ["table2", "table3", "shape-sweep", "k-sweep", "p-sweep"]


def columns(suite: str) -> list[str]:
    return COLUMNS["table" if suite in TABLE_ALPHA else suite]


def planted_trials(m: int, k: int, q: float, alpha: float, trials: int, seed: int,
                   solver: Optional[dict] = None) -> dict:
    """Draw ``trials`` graphs, run a restart batch on each, and average the
    misclassification rate of the highest-modularity partition."""
    solver = dict(solver or {})
    errs, exact, Qs, times = [], [], [], []
    for t in range(trials):
        g, truth = generate_dcsbm(SynthConfig(k=k, m=m, q=q, alpha=alpha, seed=seed + t))
        cfg = SolverConfig(k=k, seed=seed + 100_000 + t, **solver)
        t0 = time.perf_counter()
        best = best_restart(run_restarts(g, cfg))
        times.append(time.perf_counter() - t0)
        err, _, err_exact = misclassification(truth.labels, best.labels)
        errs.append(err)
        exact.append(np.nan if err_exact is None else err_exact)
        Qs.append(best.Q)
        log.info("m=%d k=%d alpha=%.2f trial %d: err=%.4f Q=%.4f", m, k, alpha, t, err, best.Q)
    return dict(
        m=m, k=k, n=m * k, q=q, alpha=alpha, trials=trials,
        err_mean=float(np.mean(errs)), err_std=float(np.std(errs)),
        err_exact_mean=float(np.mean(exact)), Q_mean=float(np.mean(Qs)),
        time_mean=float(np.mean(times)),
    )


def table_suite(suite: str, trials: int, seed: int, configs=None, q: float = 0.1, solver=None) -> list[dict]:
    alpha = TABLE_ALPHA[suite]
    rows = []
    for m, k in configs or TABLE_CONFIGS:
        row = planted_trials(m, k, q, alpha, trials, seed, solver)
        rows.append({"suite": suite, **row})
    return rows


def shape_sweep(trials: int, seed: int, m: int = 200, k: int = 2, qs=None, alphas=None, solver=None) -> list[dict]:
    rows = []
    for q in qs or SHAPE_QS:
        for alpha in alphas or SHAPE_ALPHAS:
            row = planted_trials(m, k, q, alpha, trials, seed, solver)
            rows.append({"suite": "shape-sweep", **{c: row[c] for c in COLUMNS["shape-sweep"][1:]}})
    return rows


def sweep_graph(seed: int = 11) -> Graph:
    g, _ = generate_dcsbm(SynthConfig(seed=seed, **SWEEP_GRAPH))
    return g


def _sweep(name, g, pairs, restarts, seed, solver):
    rows = []
    for k, p in pairs:
        cfg = SolverConfig(k=k, p=p, restarts=restarts, seed=seed, **(solver or {}))
        t0 = time.perf_counter()
        best = best_restart(run_restarts(g, cfg))
        dt = time.perf_counter() - t0
        rows.append({
            "suite": name, "k": k, "p": p, "k0": len(np.unique(best.labels)),
            "CC": cluster_coefficient(g, best.labels), "S": strength(g, best.labels),
            "Q": best.Q, "time": dt,
        })
        log.info("%s k=%d p=%d: Q=%.4f", name, k, p, best.Q)
    return rows


def k_sweep(g: Graph, restarts: int, seed: int, ks=None, p: int = 5, solver=None) -> list[dict]:
    return _sweep("k-sweep", g, [(k, min(p, k)) for k in ks or K_GRID if k <= g.n], restarts, seed, solver)


def p_sweep(g: Graph, restarts: int, seed: int, ps=None, k: int = 100, solver=None) -> list[dict]:
    return _sweep("p-sweep", g, [(k, p) for p in ps or P_GRID if p <= k], restarts, seed, solver)


def run_suite(suite: str, trials: int, seed: int, graph: Optional[Graph] = None, solver=None) -> list[dict]:
    """Dispatch by suite name. For the table and shape suites ``trials`` is
    the number of graph draws; for the k/p sweeps it is the restart count."""
    if suite in TABLE_ALPHA:
        return table_suite(suite, trials, seed, solver=solver)
    if suite == "shape-sweep":
        return shape_sweep(trials, seed, solver=solver)
    if suite in ("k-sweep", "p-sweep"):
        g = graph if graph is not None else sweep_graph()
        fn = k_sweep if suite == "k-sweep" else p_sweep
        return fn(g, trials, seed, solver=solver)
    raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
