import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from oracles import brute_cc, brute_strength, dense_modularity, literal_err, random_adjacency
from rbrcd.graph import from_dense, from_edges
from rbrcd.metrics import (
    cluster_coefficient,
    confusion_matrix,
    evaluate,
    misclassification,
    misclassification_exact,
    modularity,
    strength,
)


def test_single_community_has_zero_modularity(two_triangles):
    assert modularity(two_triangles, np.zeros(6, int)) == 0.0


def test_two_triangles_modularity(two_triangles):
    assert modularity(two_triangles, np.array([0, 0, 0, 1, 1, 1])) == pytest.approx(0.5, abs=1e-15)


def test_modularity_length_mismatch(two_triangles):
    with pytest.raises(ValueError):
        modularity(two_triangles, np.zeros(5, int))


def test_cc_examples():
    k4 = from_dense(1 - np.eye(4))
    assert cluster_coefficient(k4, np.zeros(4, int)) == 1.0
    star = from_edges(4, [0, 0, 0], [1, 2, 3])
    assert cluster_coefficient(star, np.zeros(4, int)) == 0.0
    # triangle 0-1-2 with pendant 3 on node 2
    g = from_edges(4, [0, 1, 2, 2], [1, 2, 0, 3])
    A = g.dense_adjacency()
    lab = np.zeros(4, int)
    assert cluster_coefficient(g, lab) == pytest.approx(brute_cc(A, lab), abs=1e-15)
    assert cluster_coefficient(g, lab) == pytest.approx((1 + 1 + 1 / 3 + 0) / 4)


def test_strength_examples(two_triangles, triangle):
    assert strength(two_triangles, np.array([0, 0, 0, 1, 1, 1])) == 1.0
    assert strength(two_triangles, np.zeros(6, int)) == 1.0
    lab = np.array([0, 0, 1])
    s = strength(triangle, lab)
    assert s < 1
    assert s == brute_strength(triangle.dense_adjacency(), lab)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_metrics_match_oracles(n, k, seed):
    r = np.random.default_rng(seed)
    A = random_adjacency(r, n)
    g = from_dense(A)
    lab = r.integers(0, k, n)
    assert modularity(g, lab) == pytest.approx(dense_modularity(A, lab), abs=1e-12)
    assert cluster_coefficient(g, lab) == pytest.approx(brute_cc(A, lab), abs=1e-12)
    assert strength(g, lab) == brute_strength(A, lab)
    q = modularity(g, lab)
    assert -0.5 <= q <= 1.0


def test_relabel_and_permutation_invariance(rng):
    for _ in range(20):
        n = 10
        A = random_adjacency(rng, n)
        g = from_dense(A)
        lab = rng.integers(0, 3, n)
        relabel = rng.permutation(3)[lab]
        assert modularity(g, relabel) == pytest.approx(modularity(g, lab), abs=1e-15)
        perm = rng.permutation(n)
        h = from_dense(A[np.ix_(perm, perm)])
        assert cluster_coefficient(h, lab[perm]) == pytest.approx(cluster_coefficient(g, lab), abs=1e-15)
        assert strength(h, lab[perm]) == strength(g, lab)


def test_misclassification_identity_and_swap():
    truth = np.repeat([0, 1], 5)
    assert misclassification(truth, truth)[0] == 0.0
    assert misclassification(truth, 1 - truth)[0] == 0.0
    assert misclassification(truth, 1 - truth)[2] == 0.0


def test_confusion_matrix_margins(rng):
    t = rng.integers(0, 4, 50)
    f = rng.integers(0, 3, 50)
    M = confusion_matrix(t, f)
    np.testing.assert_array_equal(M.sum(1), np.bincount(t))
    assert M.sum() == 50


def test_greedy_can_undercount_error_vs_exact_matching():
    # two detected communities both overlap true community 0 the most, so the
    # greedy score credits community 0 twice
    truth = np.array([0, 0, 0, 0, 1, 1, 2, 2, 2])
    found = np.array([0, 0, 1, 1, 1, 0, 2, 2, 2])
    err, M, exact = misclassification(truth, found)
    assert err == pytest.approx(literal_err(truth, found))
    assert err < exact


def test_greedy_matches_literal_formula_and_bounds(rng):
    for _ in range(200):
        n = int(rng.integers(2, 30))
        kt = int(rng.integers(1, 6))
        t = rng.integers(0, kt, n)
        f = rng.integers(0, int(rng.integers(1, 6)), n)
        err, M, exact = misclassification(t, f)
        assert err == pytest.approx(literal_err(t, f), abs=1e-12)
        ktrue = len(np.unique(t))
        assert 0.0 <= err <= 1.0 - 1.0 / ktrue + 1e-12
        # a one-to-one matching is a restriction of the greedy choice
        assert err <= exact + 1e-12
        rows, cols = linear_sum_assignment(-M)
        assert exact == pytest.approx(1 - M[rows, cols].sum() / n, abs=1e-12)


def test_exact_handles_rectangular():
    M = np.array([[5, 1, 0], [0, 4, 3]])
    assert misclassification_exact(M) == pytest.approx(1 - 9 / 13)
    assert misclassification_exact(M.T) == pytest.approx(1 - 9 / 13)


def test_evaluate_report(two_triangles):
    truth = np.array([0, 0, 0, 1, 1, 1])
    rep = evaluate(two_triangles, truth, truth=truth)
    assert rep.Q == pytest.approx(0.5)
    assert rep.S == 1.0 and rep.CC == 1.0 and rep.k0 == 2 and rep.err == 0.0
    assert rep.to_dict()["confusion"] == [[3, 0], [0, 3]]
    assert "err" not in evaluate(two_triangles, truth).to_dict()
