import numpy as np
import pytest
from scipy import stats

from rbrcd.graph import EmptyGraphError, load_edge_list
from rbrcd.synth import (
    SynthConfig,
    _unrank_pairs,
    generate_dcsbm,
    generate_sbm_sparse,
    pareto_scale,
    read_labels,
    sample_pareto_theta,
    save_synthetic,
)


def test_pareto_support_lower_bound():
    assert pareto_scale(2.0) == 0.5
    th = sample_pareto_theta(2.0, 10_000, np.random.default_rng(0))
    assert th.min() >= 0.5


def test_pareto_rejects_alpha_at_most_one():
    with pytest.raises(ValueError):
        sample_pareto_theta(1.0, 10, np.random.default_rng(0))
    with pytest.raises(ValueError):
        SynthConfig(k=2, m=3, q=0.1, alpha=0.9)


def test_pareto_distribution_matches_reference():
    alpha = 1.4
    th = sample_pareto_theta(alpha, 20_000, np.random.default_rng(1))
    ref = stats.pareto(b=alpha, scale=(alpha - 1) / alpha)
    assert stats.kstest(th, ref.cdf).pvalue > 1e-3


def test_pareto_unit_mean_truncated():
    # infinite variance at alpha=1.4: compare the mean of theta * 1{theta <= T}
    # against its closed form 1 - (beta/T)^(alpha-1), which has finite variance
    alpha, T = 1.4, 50.0
    beta = (alpha - 1) / alpha
    th = sample_pareto_theta(alpha, 100_000, np.random.default_rng(2))
    x = np.where(th <= T, th, 0.0)
    expected = 1.0 - (beta / T) ** (alpha - 1)
    se = x.std(ddof=1) / np.sqrt(len(x))
    assert abs(x.mean() - expected) < 3 * se


def test_pareto_unit_mean_finite_variance():
    th = sample_pareto_theta(3.0, 100_000, np.random.default_rng(3))
    se = th.std(ddof=1) / np.sqrt(len(th))
    assert abs(th.mean() - 1.0) < 3 * se


def test_sbm_has_unit_theta():
    _, truth = generate_dcsbm(SynthConfig(k=2, m=20, q=0.3, degree_corrected=False, seed=1))
    assert (truth.theta == 1).all()


def test_complete_graph_when_probabilities_are_one():
    g, _ = generate_dcsbm(SynthConfig(k=3, m=4, q=1.0, ratio=1.0, degree_corrected=False))
    A = g.dense_adjacency()
    np.testing.assert_array_equal(A, 1 - np.eye(12))


def test_q_zero_has_no_edges():
    with pytest.raises(EmptyGraphError):
        generate_dcsbm(SynthConfig(k=2, m=10, q=0.0))


def test_truth_layout():
    g, truth = generate_dcsbm(SynthConfig(k=3, m=7, q=0.4, seed=5))
    assert np.bincount(truth.labels).tolist() == [7, 7, 7]
    assert truth.theta.min() >= pareto_scale(1.4)
    A = g.dense_adjacency()
    assert (A == A.T).all() and (np.diag(A) == 0).all()


def test_deterministic():
    cfg = SynthConfig(k=2, m=50, q=0.2, alpha=1.6, seed=99)
    g1, t1 = generate_dcsbm(cfg)
    g2, t2 = generate_dcsbm(cfg)
    np.testing.assert_array_equal(g1.indptr, g2.indptr)
    np.testing.assert_array_equal(g1.indices, g2.indices)
    np.testing.assert_array_equal(t1.theta, t2.theta)
    g3, _ = generate_dcsbm(SynthConfig(k=2, m=50, q=0.2, alpha=1.6, seed=100))
    assert g3.n_edges != g1.n_edges or not np.array_equal(g3.indices, g1.indices)


def test_edge_count_matches_exact_expectation():
    emp, mean, var = 0, 0.0, 0.0
    for seed in range(50):
        cfg = SynthConfig(k=2, m=200, q=0.1, alpha=1.4, seed=seed)
        g, truth = generate_dcsbm(cfg)
        t, lab = truth.theta, truth.labels
        B = np.where(lab[:, None] == lab[None, :], 0.1, 0.03)
        P = np.minimum(1.0, t[:, None] * t[None, :] * B)
        iu = np.triu_indices(len(t), 1)
        emp += g.n_edges
        mean += P[iu].sum()
        var += (P[iu] * (1 - P[iu])).sum()
    assert abs(emp - mean) < 3 * np.sqrt(var)


def test_erdos_renyi_degree_moments():
    n, q, draws = 500, 0.1, 20
    N = n * (n - 1) / 2
    var_ref = (n - 1) * q * (1 - q)
    means, variances = [], []
    for seed in range(draws):
        g, _ = generate_dcsbm(SynthConfig(k=2, m=250, q=q, ratio=1.0, degree_corrected=False, seed=seed))
        means.append(g.d.mean())
        variances.append(g.d.var(ddof=1))
    mean_sd = 2 * np.sqrt(N * q * (1 - q)) / n / np.sqrt(draws)
    assert abs(np.mean(means) - (n - 1) * q) < 3 * mean_sd
    # sample variance of n near-independent near-normal degrees
    var_sd = var_ref * np.sqrt(2 / (n - 1)) / np.sqrt(draws)
    assert abs(np.mean(variances) - var_ref) < 3 * var_sd


def test_unrank_pairs_is_bijective():
    m = 60
    t = np.arange(m * (m - 1) // 2)
    r, c = _unrank_pairs(t)
    assert (c < r).all() and (c >= 0).all() and (r < m).all()
    assert len(set(zip(r.tolist(), c.tolist()))) == len(t)


def test_sparse_sbm_blocks_and_density():
    k, m, pin, pout = 4, 300, 0.05, 0.005
    g, truth = generate_sbm_sparse(k, m, pin, pout, seed=3)
    e = g.edges()
    same = truth.labels[e[:, 0]] == truth.labels[e[:, 1]]
    n_in = k * m * (m - 1) / 2
    n_out = k * (k - 1) / 2 * m * m
    assert abs(same.sum() - n_in * pin) < 4 * np.sqrt(n_in * pin)
    assert abs((~same).sum() - n_out * pout) < 4 * np.sqrt(n_out * pout)


def test_save_and_read_back(tmp_path):
    g, truth = generate_dcsbm(SynthConfig(k=2, m=30, q=0.3, seed=8))
    edges, labels = save_synthetic(tmp_path / "s", g, truth)
    h = load_edge_list(edges)
    np.testing.assert_array_equal(h.indices, g.indices)
    np.testing.assert_array_equal(read_labels(labels, h), truth.labels)
