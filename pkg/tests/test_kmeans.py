import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from oracles import adjusted_rand
from topicmine.corpus import build_tdm, make_corpus
from topicmine.errors import BadK, ZeroVector
from topicmine.kmeans import _repair_empty, kmeans, kmeans_sweep


def two_bundles(seed=0):
    rng = np.random.default_rng(seed)
    left = ["falcao", "goal", "striker", "colombia", "injury", "knee"]
    right = ["stadium", "venue", "manaus", "construction", "delay", "roof"]
    texts, truth = [], []
    for bundle, words in enumerate((left, right)):
        for _ in range(20):
            texts.append(" ".join(rng.choice(words, size=5)))
            truth.append(bundle)
    return texts, np.array(truth)


def test_k1_single_cluster():
    X = np.random.default_rng(0).random((5, 12))
    res = kmeans(X, 1, seed=3)
    assert np.all(res.labels == 0)
    assert res.objective >= 0


def test_k_equals_n_singletons():
    X = np.random.default_rng(1).random((6, 8))
    res = kmeans(X, 8, seed=0)
    assert sorted(res.labels) == list(range(8))
    assert res.objective == pytest.approx(0.0, abs=1e-12)


def test_recovers_two_bundles():
    texts, truth = two_bundles()
    A, _ = build_tdm(make_corpus(texts, stem=False))
    for seed in range(5):
        res = kmeans(A.matrix, 2, seed=seed)
        # token-set oracle: bundles have disjoint vocabularies
        assert adjusted_rand(res.labels, truth) == 1.0


def test_bad_k():
    X = np.eye(3)
    with pytest.raises(BadK):
        kmeans(X, 0)
    with pytest.raises(BadK):
        kmeans(X, 4)


def test_zero_column_rejected():
    with pytest.raises(ZeroVector):
        kmeans(np.array([[1.0, 0.0], [1.0, 0.0]]), 1)


def test_sparse_and_dense_agree():
    X = np.random.default_rng(2).random((10, 30))
    X[X < 0.6] = 0
    X[0] += 0.1
    a = kmeans(X, 4, seed=5)
    b = kmeans(sp.csc_matrix(X), 4, seed=5)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.objective == pytest.approx(b.objective)


@given(st.integers(0, 10_000), st.integers(1, 8))
@settings(max_examples=40, deadline=None)
def test_objective_non_increasing(seed, k):
    rng = np.random.default_rng(seed)
    X = rng.random((6, 25))
    X[X < 0.5] = 0
    X[rng.integers(6), :] += 0.05
    res = kmeans(X, k, seed=seed, tol=0)
    hist = np.array(res.history)
    assert np.all(np.diff(hist) <= 1e-12)
    assert res.objective <= hist[-1] + 1e-12
    assert np.all(res.labels < k) and res.objective >= 0


def test_space_init_runs():
    X = np.random.default_rng(4).random((5, 20))
    res = kmeans(X, 3, seed=1, init="space")
    assert res.labels.max() < 3
    assert res.empty_clusters == ()


def test_repair_never_adds_empty_clusters():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n, k = 12, 5
        X = rng.random((n, 4))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        centroids = rng.random((k, 4))
        centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)
        sims = X @ centroids.T
        labels = np.argmax(sims, axis=1)
        before = np.sum(np.bincount(labels, minlength=k) == 0)
        _repair_empty(X, labels, sims, centroids)
        after = np.sum(np.bincount(labels, minlength=k) == 0)
        assert after <= before
        assert after == 0


def test_sweep_counts_and_determinism():
    X = np.random.default_rng(8).random((20, 40))
    runs = kmeans_sweep(X, range(2, 13), seed=11)
    assert [r.k for r in runs] == list(range(2, 13))
    again = kmeans_sweep(X, range(2, 13), seed=11)
    for a, b in zip(runs, again):
        assert a.labels.tobytes() == b.labels.tobytes()
    assert len(kmeans_sweep(X, range(3, 4), seed=0)) == 1
    assert len(kmeans_sweep(X, range(2, 4), seed=0, repeats_per_k=3)) == 6


def test_sweep_empty_range():
    with pytest.raises(BadK):
        kmeans_sweep(np.eye(3), range(5, 2))
