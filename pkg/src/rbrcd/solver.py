"""Proximal row-by-row block coordinate descent for the sparse low-rank
completely-positive relaxation of modularity maximization::

    min <C, U U^T>   s.t.  ||u_i|| = 1,  ||u_i||_0 <= p,  U >= 0

Each row update has a closed-form solution, so a full sweep costs
``O((k + p) n + p |E|)``. The asynchronous mode lets worker threads sweep
disjoint rows of the shared factor without locks, as in HOGWILD!-style
solvers; only the claim of the next block of rows is serialized.
"""

from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .graph import Graph

log = logging.getLogger(__name__)

ProgressCallback = Callable[[int, float, float], None]


@dataclass
class FactorMatrix:
    """Row-sparse nonnegative factor ``U`` plus the shared accumulator ``d^T U``.

    ``cols[i, s] == -1`` marks an unused slot of row ``i``.
    """

    cols: np.ndarray
    vals: np.ndarray
    k: int
    dtU: np.ndarray

    @property
    def n(self) -> int:
        return self.cols.shape[0]

    @property
    def p(self) -> int:
        return self.cols.shape[1]

    def copy(self) -> "FactorMatrix":
        return FactorMatrix(self.cols.copy(), self.vals.copy(), self.k, self.dtU.copy())

    def to_dense(self) -> np.ndarray:
        U = np.zeros((self.n, self.k))
        rows, slots = np.nonzero(self.cols >= 0)
        U[rows, self.cols[rows, slots]] = self.vals[rows, slots]
        return U

    def refresh(self, d: np.ndarray) -> None:
        self.dtU[:] = K.accumulate_dtU(d, self.cols, self.vals, self.k)

    def drift(self, d: np.ndarray) -> float:
        return float(np.max(np.abs(self.dtU - K.accumulate_dtU(d, self.cols, self.vals, self.k))))

    @classmethod
    def empty(cls, n: int, k: int, p: int) -> "FactorMatrix":
        return cls(np.full((n, p), -1, dtype=np.int64), np.zeros((n, p)), k, np.zeros(k))

    @classmethod
    def from_dense(cls, U, d: np.ndarray, p: Optional[int] = None) -> "FactorMatrix":
        U = np.asarray(U, dtype=np.float64)
        n, k = U.shape
        nnz = (U > 0).sum(axis=1)
        if p is None:
            p = max(1, int(nnz.max()))
        if nnz.max() > p:
            raise ValueError(f"a row has {nnz.max()} nonzeros, more than p={p}")
        F = cls.empty(n, k, p)
        for i in range(n):
            cs = np.flatnonzero(U[i] > 0)
            F.cols[i, :len(cs)] = cs
            F.vals[i, :len(cs)] = U[i, cs]
        F.refresh(d)
        return F

    @classmethod
    def random(cls, n: int, k: int, p: int, d: np.ndarray, rng: np.random.Generator,
               init: str = "support") -> "FactorMatrix":
        """Random feasible start.

        ``init="support"``: ``p`` distinct random columns per row with uniform
        magnitudes, normalized. ``init="single"``: a random unit coordinate.
        """
        F = cls.empty(n, k, p)
        if init == "single":
            F.cols[:, 0] = rng.integers(0, k, size=n)
            F.vals[:, 0] = 1.0
        elif init == "support":
            w = min(p, k)
            # argsort of uniform keys gives a uniformly random w-subset per row
            F.cols[:, :w] = np.argsort(rng.random((n, k)), axis=1)[:, :w]
            v = rng.random((n, w)) + 1e-12
            F.vals[:, :w] = v / np.linalg.norm(v, axis=1, keepdims=True)
        else:
            raise ValueError(f"unknown init {init!r}")
        F.refresh(d)
        return F

    def check(self, d: Optional[np.ndarray] = None, tol: float = 1e-9) -> None:
        """Assert the row invariants (unit norm, positivity, at most p entries)."""
        used = self.cols >= 0
        if np.any(self.vals[used] <= 0) or np.any(self.vals[~used] != 0):
            raise AssertionError("stored values must be positive, empty slots zero")
        if np.any(self.cols >= self.k):
            raise AssertionError("column index out of range")
        for i in np.flatnonzero(used.sum(axis=1) > 1):
            c = self.cols[i][used[i]]
            if len(np.unique(c)) != len(c):
                raise AssertionError(f"row {i} repeats a column")
        norms = np.sqrt((self.vals ** 2).sum(axis=1))
        if np.any(np.abs(norms - 1.0) > tol):
            raise AssertionError(f"row norms deviate from 1 by {np.abs(norms - 1).max():.3g}")
        if d is not None and self.drift(d) > 1e-6 * max(1.0, d.sum()):
            raise AssertionError("d^T U accumulator is stale")


@dataclass(frozen=True)
class SolverConfig:
    k: int
    p: Optional[int] = None
    sigma: float = 0.01
    max_sweeps: int = 100
    restarts: int = 10
    rounding_every: int = 0
    threads: int = 1
    seed: int = 0
    tol: Optional[float] = None
    init: str = "support"
    recover: str = "rounding"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.p is not None and not 1 <= self.p <= self.k:
            raise ValueError(f"p must satisfy 1 <= p <= k, got p={self.p}, k={self.k}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.rounding_every < 0:
            raise ValueError("rounding_every must be >= 0")
        if self.recover not in ("rounding", "kmeans", "wkmeans"):
            raise ValueError(f"unknown recovery scheme {self.recover!r}")

    @property
    def row_nnz(self) -> int:
        return self.k if self.p is None else self.p

    def stop_tol(self, n: int) -> float:
        return 1e-8 * n if self.tol is None else self.tol


def validate(g: Graph, cfg: SolverConfig) -> None:
    if cfg.k > g.n:
        raise ValueError(f"k={cfg.k} exceeds the number of nodes n={g.n}")


def subproblem_solve(b, p: int) -> np.ndarray:
    """Closed-form minimizer of ``b @ x`` over the unit sphere intersected
    with the nonnegative orthant and ``{x : ||x||_0 <= p}``.

    If ``b`` has negative entries the answer is the ``p`` largest entries of
    ``max(-b, 0)`` normalized; otherwise it is the coordinate vector of the
    smallest entry of ``b``. Ties resolve to the lowest index.
    """
    b = np.ascontiguousarray(b, dtype=np.float64)
    if not np.all(np.isfinite(b)):
        raise ValueError("b must be finite")
    k = b.shape[0]
    if not 1 <= p <= k:
        raise ValueError(f"p must satisfy 1 <= p <= k, got p={p}, k={k}")
    cols = np.empty(p, dtype=np.int64)
    vals = np.empty(p)
    K.solve_row(b, p, cols, vals)
    u = np.zeros(k)
    used = cols >= 0
    u[cols[used]] = vals[used]
    return u


def compute_b(g: Graph, U: FactorMatrix, i: int, sigma: float) -> np.ndarray:
    b = np.empty(U.k)
    K.compute_b(g.indptr, g.indices, g.d, g.lam, U.cols, U.vals, U.dtU, i, sigma, b)
    return b


def objective(g: Graph, U: FactorMatrix) -> float:
    """``f(U) = <C, U U^T>`` evaluated without forming ``C``."""
    return float(K.objective(g.indptr, g.indices, g.d, g.lam, U.cols, U.vals, U.k))


def rbr_sweep_sequential(g: Graph, U: FactorMatrix, cfg: SolverConfig,
                         order: Optional[np.ndarray] = None) -> tuple[FactorMatrix, float]:
    """One in-place pass over all rows; returns ``(U, ||U_new - U_old||_F^2)``."""
    if order is None:
        order = np.arange(g.n, dtype=np.int64)
    b = np.empty(U.k)
    scratch = np.zeros(U.k)
    delta = K.sweep_rows(g.indptr, g.indices, g.d, g.lam, U.cols, U.vals, U.dtU,
                         order, 0, len(order), cfg.sigma, b, scratch)
    return U, float(delta)


def round_in_place(U: FactorMatrix, d: np.ndarray) -> FactorMatrix:
    """Replace every row by the indicator of its largest entry, then rebuild
    ``d^T U`` from scratch."""
    K.round_rows(U.cols, U.vals)
    U.refresh(d)
    return U


@dataclass
class RunTrace:
    sweeps: int = 0
    f_initial: float = float("nan")
    f_final: float = float("nan")
    deltas: list = field(default_factory=list)
    drift: list = field(default_factory=list)
    refreshes: int = 0
    roundings: int = 0
    converged: bool = False


def _after_sweep(g, U, cfg, sweep, delta, trace, callback, check_drift):
    trace.sweeps = sweep
    trace.deltas.append(delta)
    if check_drift:
        drift = U.drift(g.d)
        trace.drift.append(drift)
        if drift > 1e-6 * g.total_degree:
            log.debug("sweep %d: d^T U drift %.3g, refreshing", sweep, drift)
            U.refresh(g.d)
            trace.refreshes += 1
    if cfg.rounding_every and sweep % cfg.rounding_every == 0:
        round_in_place(U, g.d)
        trace.roundings += 1
    if callback is not None:
        callback(sweep, objective(g, U), delta)


def rbr_run_sequential(g: Graph, U: FactorMatrix, cfg: SolverConfig,
                       callback: Optional[ProgressCallback] = None) -> tuple[FactorMatrix, RunTrace]:
    """Sweep rows in index order until ``max_sweeps`` or the squared step
    falls below the stopping tolerance."""
    trace = RunTrace(f_initial=objective(g, U))
    tol = cfg.stop_tol(g.n)
    for sweep in range(1, cfg.max_sweeps + 1):
        _, delta = rbr_sweep_sequential(g, U, cfg)
        _after_sweep(g, U, cfg, sweep, delta, trace, callback, check_drift=False)
        if delta < tol:
            trace.converged = True
            break
    trace.f_final = objective(g, U)
    return U, trace


def rbr_run_async(g: Graph, U: FactorMatrix, cfg: SolverConfig,
                  callback: Optional[ProgressCallback] = None,
                  block: Optional[int] = None) -> tuple[FactorMatrix, RunTrace]:
    """Lock-free parallel sweeps over ``cfg.threads`` worker threads.

    Workers claim contiguous blocks of rows from a shared cursor, so each row
    has a single writer per sweep. Reads of neighbor rows and of ``d^T U``
    may be stale or torn, and accumulator updates are unsynchronized
    read-modify-writes. A drift monitor rebuilds ``d^T U`` after a sweep if
    lost updates pushed it past ``1e-6 * ||d||_1``. Runs exactly
    ``max_sweeps`` sweeps.
    """
    trace = RunTrace(f_initial=objective(g, U))
    n, k = g.n, U.k
    order = np.arange(n, dtype=np.int64)
    if block is None:
        block = max(32, n // (16 * cfg.threads))
    nblocks = (n + block - 1) // block
    args = (g.indptr, g.indices, g.d, g.lam, U.cols, U.vals, U.dtU, order)

    def worker(cursor):
        b = np.empty(k)
        scratch = np.zeros(k)
        delta = 0.0
        for blk in cursor:
            if blk >= nblocks:
                break
            lo = blk * block
            delta += K.sweep_rows(*args, lo, min(n, lo + block), cfg.sigma, b, scratch)
        return delta

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for sweep in range(1, cfg.max_sweeps + 1):
            if cfg.threads == 1:
                delta = K.sweep_rows(*args, 0, n, cfg.sigma, np.empty(k), np.zeros(k))
            else:
                # next() on itertools.count is atomic under the GIL
                cursor = itertools.count()
                futures = [pool.submit(worker, cursor) for _ in range(cfg.threads)]
                delta = sum(f.result() for f in futures)
            _after_sweep(g, U, cfg, sweep, float(delta), trace, callback, check_drift=True)
    trace.f_final = objective(g, U)
    return U, trace


def rbr_run(g: Graph, U: FactorMatrix, cfg: SolverConfig,
            callback: Optional[ProgressCallback] = None) -> tuple[FactorMatrix, RunTrace]:
    if cfg.threads == 1:
        return rbr_run_sequential(g, U, cfg, callback)
    return rbr_run_async(g, U, cfg, callback)


@dataclass
class RestartResult:
    index: int
    labels: np.ndarray
    Q: float
    trace: RunTrace
    seconds: float


def restart_seeds(seed: int, restarts: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(restarts)


def run_restarts(g: Graph, cfg: SolverConfig, callback: Optional[ProgressCallback] = None) -> list[RestartResult]:
    """Independent solves from random starts, each followed by recovery.

    Restart ``r`` draws all of its randomness from the ``r``-th child of
    ``SeedSequence(cfg.seed)``, so sequential runs are reproducible.
    """
    from .cluster import recover
    from .metrics import modularity

    validate(g, cfg)
    out = []
    for r, ss in enumerate(restart_seeds(cfg.seed, cfg.restarts)):
        t0 = time.perf_counter()
        rng = np.random.default_rng(ss)
        U = FactorMatrix.random(g.n, cfg.k, cfg.row_nnz, g.d, rng, cfg.init)
        U, trace = rbr_run(g, U, cfg, callback)
        part = recover(U, cfg.recover, d=g.d, rng=rng)
        Q = modularity(g, part)
        dt = time.perf_counter() - t0
        log.info("restart %d: sweeps=%d f=%.6g Q=%.6f (%.2fs)", r, trace.sweeps, trace.f_final, Q, dt)
        out.append(RestartResult(r, part.labels, Q, trace, dt))
    return out


def best_restart(results: list[RestartResult]) -> RestartResult:
    # first maximum wins, so ties keep the earliest restart
    return max(results, key=lambda r: r.Q)


def detect(g: Graph, cfg: SolverConfig, truth=None, callback: Optional[ProgressCallback] = None):
    """Solve, recover and keep the highest-modularity partition.

    Returns ``(Partition, MetricsReport)``. ``truth`` (label array) adds the
    misclassification rate and confusion matrix to the report.
    """
    from .cluster import Partition
    from .metrics import evaluate

    t0 = time.perf_counter()
    results = run_restarts(g, cfg, callback)
    best = best_restart(results)
    part = Partition.from_labels(best.labels)
    report = evaluate(g, part, truth=truth)
    report.wall_time_s = time.perf_counter() - t0
    return part, report
