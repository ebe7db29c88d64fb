"""Community detection by proximal row-by-row block coordinate descent on a
sparse low-rank completely-positive relaxation of modularity maximization."""

from .cluster import Partition, recover_kmeans, recover_rounding
from .graph import Graph, GraphError, degrees_and_lambda, from_edges, load_edge_list, write_edge_list
from .metrics import MetricsReport, cluster_coefficient, evaluate, misclassification, modularity, strength
from .solver import (
    FactorMatrix,
    SolverConfig,
    compute_b,
    detect,
    objective,
    rbr_run,
    rbr_run_async,
    rbr_run_sequential,
    rbr_sweep_sequential,
    round_in_place,
    subproblem_solve,
)
from .synth import GroundTruth, SynthConfig, generate_dcsbm, sample_pareto_theta

__version__ = "0.1.0"
