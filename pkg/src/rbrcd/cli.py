"""Command-line entry point: ``rbrcd {detect,synth,eval,bench}``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

from . import __version__
from .bench import SUITES, columns, run_suite
from .cluster import Partition
from .graph import GraphError, load_edge_list
from .metrics import evaluate
from .solver import SolverConfig, best_restart, run_restarts
from .synth import SynthConfig, generate_dcsbm, read_labels, save_synthetic, write_labels

log = logging.getLogger("rbrcd")

REPORT_SCHEMA = "rbrcd.report/1"
# graphs below this size default to p = k (no sparsity cap)
SMALL_GRAPH = 10_000


def default_p(n: int, k: int) -> int:
    return k if n < SMALL_GRAPH else min(5, k)


def _write_json(path, obj):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def cmd_detect(args) -> int:
    t0 = time.perf_counter()
    g = load_edge_list(args.graph)
    t_load = time.perf_counter() - t0
    truth = read_labels(args.truth, g) if args.truth else None
    p = args.p if args.p is not None else default_p(g.n, args.k)
    cfg = SolverConfig(
        k=args.k, p=p, sigma=args.sigma, max_sweeps=args.sweeps, restarts=args.restarts,
        rounding_every=args.rounding_every, threads=args.threads, seed=args.seed,
        tol=args.tol, init=args.init, recover=args.recover,
    )
    t1 = time.perf_counter()
    results = run_restarts(g, cfg)
    best = best_restart(results)
    t_solve = time.perf_counter() - t1
    part = Partition.from_labels(best.labels)
    rep = evaluate(g, part, truth=truth)
    t_total = time.perf_counter() - t0
    rep.wall_time_s = t_total

    if args.labels_out:
        write_labels(args.labels_out, g.node_ids, part.labels)
    record = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "command": "detect",
        "config": {"graph": args.graph, "truth": args.truth, **vars(cfg)},
        "graph": {"n": g.n, "edges": g.n_edges, "isolated": int(len(g.isolated))},
        "seed": cfg.seed,
        "restarts": [
            {
                "index": r.index, "Q": r.Q, "sweeps": r.trace.sweeps, "converged": r.trace.converged,
                "f_initial": r.trace.f_initial, "f_final": r.trace.f_final,
                "last_delta_sq": r.trace.deltas[-1] if r.trace.deltas else None,
                "dtU_refreshes": r.trace.refreshes, "seconds": r.seconds,
            }
            for r in results
        ],
        "best_restart": best.index,
        "labels_path": args.labels_out,
        "metrics": rep.to_dict(),
        "timing": {"load_s": t_load, "solve_s": t_solve, "total_s": t_total},
    }
    if args.out:
        _write_json(args.out, record)
    print(f"Q={rep.Q:.6f} k0={rep.k0} time={t_total:.3f}s")
    if rep.err is not None:
        print(f"err={rep.err:.6f}")
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(k=args.k, m=args.m, q=args.q, alpha=args.alpha, ratio=args.ratio,
                      seed=args.seed, degree_corrected=not args.sbm)
    g, truth = generate_dcsbm(cfg)
    edges, labels = save_synthetic(args.out, g, truth)
    print(f"n={g.n} edges={g.n_edges} -> {edges}, {labels}")
    return 0


def cmd_eval(args) -> int:
    g = load_edge_list(args.graph)
    labels = read_labels(args.labels, g)
    truth = read_labels(args.truth, g) if args.truth else None
    t0 = time.perf_counter()
    rep = evaluate(g, labels, truth=truth)
    rep.wall_time_s = time.perf_counter() - t0
    out = {"schema": REPORT_SCHEMA, "version": __version__, "command": "eval",
           "graph": {"n": g.n, "edges": g.n_edges}, "metrics": rep.to_dict()}
    if args.out:
        _write_json(args.out, out)
    print(json.dumps(out["metrics"]))
    return 0


def cmd_bench(args) -> int:
    graph = load_edge_list(args.graph) if args.graph else None
    solver = {"sigma": args.sigma, "max_sweeps": args.sweeps, "threads": args.threads}
    if args.suite not in ("k-sweep", "p-sweep"):
        solver["restarts"] = args.restarts
    rows = run_suite(args.suite, args.trials, args.seed, graph=graph, solver=solver)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=columns(args.suite))
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rbrcd", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect communities in an edge-list graph")
    d.add_argument("--graph", required=True)
    d.add_argument("--k", type=int, required=True, help="number of columns of U (max communities)")
    d.add_argument("--p", type=int, default=None,
                   help=f"nonzeros per row (default: k if n < {SMALL_GRAPH}, else min(5, k))")
    d.add_argument("--sigma", type=float, default=0.01)
    d.add_argument("--sweeps", type=int, default=100)
    d.add_argument("--restarts", type=int, default=10)
    d.add_argument("--threads", type=int, default=1)
    d.add_argument("--rounding-every", type=int, default=0)
    d.add_argument("--tol", type=float, default=None)
    d.add_argument("--init", choices=["support", "single"], default="support")
    d.add_argument("--recover", choices=["rounding", "kmeans", "wkmeans"], default="rounding")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--truth", default=None, help="ground-truth 'node label' file")
    d.add_argument("--out", default=None, help="JSON report path")
    d.add_argument("--labels-out", default=None)
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("synth", help="generate a (DC)SBM graph with planted communities")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int, required=True, help="nodes per community")
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--alpha", type=float, default=1.4)
    s.add_argument("--ratio", type=float, default=0.3)
    s.add_argument("--sbm", action="store_true", help="no degree correction (theta = 1)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output prefix for .edges and .truth")
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="score a labelling")
    e.add_argument("--graph", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--truth", default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    b.add_argument("--suite", choices=SUITES, required=True)
    b.add_argument("--trials", type=int, default=20,
                   help="graph draws per configuration (restarts for k-/p-sweep)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--restarts", type=int, default=10)
    b.add_argument("--sigma", type=float, default=0.01)
    b.add_argument("--sweeps", type=int, default=100)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--graph", default=None, help="edge list for k-/p-sweep instead of the built-in graph")
    b.add_argument("--out", default=None, help="CSV path (default stdout)")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (GraphError, ValueError, OSError) as exc:
        print(f"rbrcd {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

