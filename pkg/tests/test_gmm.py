import numpy as np
import pytest

from asrbias.errors import DataError
from asrbias.gmm import DiagGmm, train_gmm


def test_k1_closed_form():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((500, 3)) * np.array([1.0, 2.0, 0.5]) + np.array([0.1, -1.0, 3.0])
    gmm = train_gmm(x, 1, n_iter=3, seed=0)
    assert np.max(np.abs(gmm.means[0] - x.mean(axis=0))) < 1e-10
    assert np.max(np.abs(gmm.variances[0] - x.var(axis=0))) < 1e-10
    assert gmm.weights[0] == pytest.approx(1.0)


def test_loglik_monotone():
    rng = np.random.default_rng(1)
    for trial in range(10):
        x = rng.standard_normal((400, 4)) + rng.normal(size=4)
        gmm = train_gmm(x, 4, n_iter=8, seed=trial)
        lls = gmm.log_likelihoods
        assert len(lls) == 9
        assert all(b >= a - 1e-6 for a, b in zip(lls, lls[1:]))


def test_two_cluster_recovery():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((600, 2)) + 5.0
    b = rng.standard_normal((600, 2)) - 5.0
    x = np.concatenate([a, b])
    gmm = train_gmm(x, 2, n_iter=15, seed=0)
    means = gmm.means[np.argsort(gmm.means[:, 0])]
    assert np.max(np.abs(means[0] - (-5.0))) < 0.1
    assert np.max(np.abs(means[1] - 5.0)) < 0.1
    assert gmm.weights == pytest.approx([0.5, 0.5], abs=0.02)


def test_weights_simplex_and_floored_variances():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((1000, 3))
    gmm = train_gmm(x, 8, n_iter=10, seed=0)
    assert gmm.weights.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(gmm.weights >= 0.0)
    assert np.all(gmm.variances > 0.0)


def test_insufficient_data():
    x = np.zeros((50, 4))
    with pytest.raises(DataError, match="insufficient"):
        train_gmm(x, 4, n_iter=2, seed=0)


def test_deterministic():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((800, 3))
    a = train_gmm(x, 4, n_iter=5, seed=7)
    b = train_gmm(x, 4, n_iter=5, seed=7)
    assert np.array_equal(a.means, b.means)
    assert np.array_equal(a.variances, b.variances)
    assert np.array_equal(a.weights, b.weights)


def test_log_prob_matches_direct_density():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((200, 2))
    gmm = DiagGmm(
        weights=np.array([0.3, 0.7]),
        means=np.array([[0.0, 0.0], [1.0, -1.0]]),
        variances=np.array([[1.0, 2.0], [0.5, 1.5]]),
    )
    direct = np.zeros((200, 2))
    for k in range(2):
        diff = x - gmm.means[k]
        direct[:, k] = (
            np.log(gmm.weights[k])
            - 0.5 * np.sum(np.log(2 * np.pi * gmm.variances[k]))
            - 0.5 * np.sum(diff**2 / gmm.variances[k], axis=1)
        )
    expected = np.log(np.exp(direct).sum(axis=1))
    assert np.max(np.abs(gmm.log_prob(x) - expected)) < 1e-10


def test_invalid_parameters_rejected():
    with pytest.raises(DataError):
        DiagGmm(np.array([0.5, 0.6]), np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(DataError):
        DiagGmm(np.array([1.0]), np.zeros((1, 2)), np.array([[1.0, -1.0]]))
