import numpy as np
import pytest

from oracles import jacobi_eigenvalues
from topicmine.spectral import analyze, cut_weak_pairs, laplacian, laplacian_eigenvalues, suggest_k
from topicmine.synthetic import block_consensus


def random_consensus(rng, n, runs=6):
    C = rng.integers(0, runs + 1, (n, n))
    C = np.triu(C, 1)
    C = C + C.T
    np.fill_diagonal(C, runs)
    return C


@pytest.mark.parametrize("g", [1, 2, 4])
def test_block_kernel_dimension(g):
    C, _ = block_consensus([5] * g, runs=7)
    ev = laplacian_eigenvalues(C, 5 * g).eigenvalues
    scale = ev.max()
    assert np.sum(ev <= 1e-8 * scale) == g


def test_zero_matrix_all_zero():
    ev = laplacian_eigenvalues(np.zeros((6, 6)), 6).eigenvalues
    assert np.all(ev == 0)


def test_matches_jacobi_oracle():
    rng = np.random.default_rng(0)
    C = random_consensus(rng, 10)
    ev = laplacian_eigenvalues(C, 10).eigenvalues
    ref = jacobi_eigenvalues(laplacian(C))
    np.testing.assert_allclose(ev, ref, atol=1e-8 * max(1, max(ref)))


def test_lanczos_path_matches_dense():
    rng = np.random.default_rng(1)
    C, _ = block_consensus([12, 15, 9, 14], runs=11, flip=0.1, seed=1)
    noise = np.triu(rng.random(C.shape) < 0.02, 1)
    C = C + (noise + noise.T)
    dense = laplacian_eigenvalues(C, 8).eigenvalues
    sparse = laplacian_eigenvalues(C, 8, dense_limit=10).eigenvalues
    np.testing.assert_allclose(sparse, dense, atol=1e-7 * dense.max())


def test_psd_and_kernel_vector():
    rng = np.random.default_rng(2)
    for _ in range(20):
        C = random_consensus(rng, 12)
        L = laplacian(C)
        norm = np.linalg.norm(L)
        ev = laplacian_eigenvalues(C, 12).eigenvalues
        assert ev.min() >= -1e-8 * norm
        assert ev[0] <= 1e-8 * norm
        assert np.linalg.norm(L @ np.ones(12)) <= 1e-8 * norm
        assert np.all(np.diff(ev) >= 0)


def test_diagonal_is_ignored():
    C, _ = block_consensus([4, 4], runs=5)
    C2 = C.copy()
    np.fill_diagonal(C2, 0)
    np.testing.assert_array_equal(laplacian(C), laplacian(C2))


def test_normalized_variant_bounds():
    C, _ = block_consensus([6, 6, 6], runs=4, flip=0.2, seed=3)
    ev = laplacian_eigenvalues(C, 18, normalized=True).eigenvalues
    assert ev.min() >= -1e-10 and ev.max() <= 2 + 1e-10
    assert np.sum(ev < 1e-8) == 3


def test_suggest_k_count_convention():
    # three zero eigenvalues -> three components
    gap_index, k, gaps = suggest_k([0, 0, 0, 5, 6, 7])
    assert gap_index == 2 and k == 3
    assert gaps.tolist() == [0, 0, 5, 1, 1]


def test_suggest_k_upper_convention():
    assert suggest_k([0, 0, 0, 5, 6, 7], convention="upper")[1] == 4


def test_suggest_k_two_values():
    assert suggest_k([0, 1])[1] == 1
    assert suggest_k([0, 1], convention="upper")[1] == 2


def test_suggest_k_min_k():
    # the trivial first gap is skipped when min_k = 2
    ev = [0, 10, 10.5, 11, 18]
    assert suggest_k(ev)[1] == 1
    assert suggest_k(ev, min_k=2)[1] == 4


@pytest.mark.parametrize("g", [3, 5, 9])
def test_block_models_recover_g(g):
    hits = 0
    for seed in range(10):
        C, _ = block_consensus([30] * g, runs=11, flip=0.05, seed=seed)
        hits += analyze(C, 50).suggested_k == g
    assert hits >= 9


def test_analyze_gap_table():
    C, _ = block_consensus([5, 5], runs=3)
    res = analyze(C, 4)
    table = res.gap_table()
    assert [row[0] for row in table] == [1, 2, 3, 4]
    assert res.suggested_k == 2
    assert np.isnan(table[-1][2])


def test_cut_weak_pairs():
    counts = np.array([[11, 6, 5], [6, 11, 9], [5, 9, 11]])
    out = cut_weak_pairs(counts, 0.5)
    np.testing.assert_array_equal(out, [[0, 6, 0], [6, 0, 9], [0, 9, 0]])
    with pytest.raises(ValueError):
        cut_weak_pairs(counts, 1.0)


def test_cut_splits_weakly_joined_blocks():
    C, _ = block_consensus([10, 10], runs=11)
    C = C.copy()
    C[:10, 10:] = C[10:, :10] = 3
    assert analyze(C, 10).eigenvalues[1] > 1
    res = analyze(C, 10, cut=0.5)
    assert res.suggested_k == 2
    assert np.all(np.abs(res.eigenvalues[:2]) < 1e-9)
