import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import cosine_distance_loop
from topicmine.errors import ZeroVector
from topicmine.sparsemat import DistanceMatrix, cosine_similarity, pairwise_cosine_distance


def test_cosine_examples():
    assert cosine_similarity([1, 0], [0, 1]) == 0
    assert cosine_similarity([1, 1, 0], [1, 0, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert cosine_similarity([3, 4], [3, 4]) == pytest.approx(1.0)


def test_cosine_sparse_inputs():
    x = sp.csr_matrix([[1.0, 1.0, 0.0]])
    y = sp.csr_matrix([[1.0, 0.0, 0.0]])
    assert cosine_similarity(x, y) == pytest.approx(1 / math.sqrt(2))


def test_cosine_zero_vector():
    with pytest.raises(ZeroVector):
        cosine_similarity([0, 0], [1, 0])


@given(
    arrays(np.float64, 6, elements=st.floats(0, 10)).filter(lambda v: v.sum() > 1e-3),
    st.floats(1e-3, 1e3),
)
def test_cosine_scale_invariance(x, alpha):
    assert cosine_similarity(x, alpha * x) == pytest.approx(1.0, abs=1e-12)


def test_pairwise_identical_and_disjoint():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    D = pairwise_cosine_distance(sp.csc_matrix(A)).square()
    assert D[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert D[0, 2] == 1.0


def test_pairwise_matches_loop_oracle():
    rng = np.random.default_rng(3)
    A = rng.random((3, 3))
    D = pairwise_cosine_distance(A).square()
    np.testing.assert_allclose(D, cosine_distance_loop(A), atol=1e-12)


def test_pairwise_zero_column():
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ZeroVector) as exc:
        pairwise_cosine_distance(A)
    assert exc.value.index == 1


@given(arrays(np.float64, (4, 7), elements=st.floats(0, 5)).filter(lambda a: np.all(a.sum(0) > 1e-2)))
def test_distance_matrix_invariants(A):
    D = pairwise_cosine_distance(A, block=3)
    S = D.square()
    assert np.all(np.diag(S) == 0)
    assert np.array_equal(S, S.T)
    assert S.min() >= 0 and S.max() <= 1
    for i in range(D.n):
        np.testing.assert_array_equal(D.row(i), S[i])
    assert D[1, 3] == S[1, 3]


def test_distance_matrix_roundtrip():
    S = np.array([[0, 0.2, 0.5], [0.2, 0, 0.7], [0.5, 0.7, 0]])
    D = DistanceMatrix.from_square(S)
    np.testing.assert_array_equal(D.square(), S)
    np.testing.assert_array_equal(D.rows(1, 3), S[1:3])
