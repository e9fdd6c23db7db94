"""Cosine similarity/distance kernels over sparse nonnegative vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ZeroVector


def _as_dense_vector(x) -> np.ndarray:
    if sp.issparse(x):
        return np.asarray(x.todense(), dtype=np.float64).ravel()
    return np.asarray(x, dtype=np.float64).ravel()


def cosine_similarity(x, y) -> float:
    """``x.y / (|x| |y|)`` clamped to [0, 1]."""
    if sp.issparse(x) and sp.issparse(y):
        x = sp.csr_matrix(x.reshape(1, -1))
        y = sp.csr_matrix(y.reshape(1, -1))
        nx = np.sqrt(x.multiply(x).sum())
        ny = np.sqrt(y.multiply(y).sum())
        dot = x.multiply(y).sum()
    else:
        xv, yv = _as_dense_vector(x), _as_dense_vector(y)
        nx, ny = np.linalg.norm(xv), np.linalg.norm(yv)
        dot = float(xv @ yv)
    if nx == 0:
        raise ZeroVector(0, "first vector is all zeros")
    if ny == 0:
        raise ZeroVector(1, "second vector is all zeros")
    return float(min(1.0, max(0.0, dot / (nx * ny))))


def cosine_distance(x, y) -> float:
    return 1.0 - cosine_similarity(x, y)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric n x n distances with zero diagonal, stored as the packed
    strict upper triangle (row-major, same layout as scipy's condensed form).
    """

    n: int
    packed: np.ndarray

    def __post_init__(self):
        if self.packed.shape != (self.n * (self.n - 1) // 2,):
            raise ValueError("packed length does not match n")

    def _offsets(self, i: int, j: np.ndarray) -> np.ndarray:
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        return self.n * lo - lo * (lo + 1) // 2 + hi - lo - 1

    def row(self, i: int) -> np.ndarray:
        j = np.arange(self.n)
        out = np.zeros(self.n)
        mask = j != i
        out[mask] = self.packed[self._offsets(i, j[mask])]
        return out

    def rows(self, start: int, stop: int) -> np.ndarray:
        return np.vstack([self.row(i) for i in range(start, stop)]) if stop > start else np.zeros((0, self.n))

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            return 0.0
        return float(self.packed[self._offsets(i, np.asarray(j))])

    def square(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        out[iu] = self.packed
        out.T[iu] = self.packed
        return out

    @classmethod
    def from_square(cls, mat) -> "DistanceMatrix":
        mat = np.asarray(mat, dtype=np.float64)
        n = mat.shape[0]
        return cls(n, mat[np.triu_indices(n, 1)].copy())


def pairwise_cosine_distance(A, block: int = 1024) -> DistanceMatrix:
    """``1 - cos`` between every pair of columns of ``A``.

    ``A`` is a TermDocMatrix, a sparse matrix, or a dense array; columns are
    the points.
    """
    mat = getattr(A, "matrix", A)
    mat = sp.csc_matrix(mat, dtype=np.float64)
    n = mat.shape[1]
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=0)).ravel())
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVector(int(zero[0]))
    unit = (mat @ sp.diags(1.0 / norms)).tocsc()
    unit_t = unit.T.tocsr()

    packed = np.empty(n * (n - 1) // 2)
    pos = 0
    for start in range(0, n, block):
        stop = min(n, start + block)
        sims = np.asarray((unit_t[start:stop] @ unit).todense())
        np.clip(sims, 0.0, 1.0, out=sims)
        for r in range(stop - start):
            i = start + r
            seg = 1.0 - sims[r, i + 1 :]
            packed[pos : pos + seg.size] = seg
            pos += seg.size
    return DistanceMatrix(n, packed)
