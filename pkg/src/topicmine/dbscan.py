"""DBSCAN on a precomputed distance (or similarity) matrix.

Besides cluster labels this exposes the per-point dense/border/noise
classification, which the noise-removal ensemble votes on.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from .sparsemat import DistanceMatrix

# rows materialized at once when scanning a packed distance matrix
_BLOCK = 512


class PointClass(IntEnum):
    NOISE = 0
    BORDER = 1
    DENSE = 2


@dataclass(frozen=True)
class DbscanParams:
    eps: float
    min_pts: int

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")


def _size(D) -> int:
    return D.n if isinstance(D, DistanceMatrix) else np.asarray(D).shape[0]


def _row_blocks(D, block=_BLOCK):
    if isinstance(D, DistanceMatrix):
        for start in range(0, D.n, block):
            stop = min(D.n, start + block)
            yield start, D.rows(start, stop)
    else:
        D = np.asarray(D)
        for start in range(0, D.shape[0], block):
            yield start, D[start : start + block]


def _within(rows, eps, similarity):
    return rows >= eps if similarity else rows <= eps


def _classify_many(D, eps_values, min_pts, similarity=False) -> np.ndarray:
    """Classification table, one column per eps value, in two passes over D."""
    n = _size(D)
    eps_values = list(eps_values)
    counts = np.zeros((n, len(eps_values)), dtype=np.int64)
    for start, rows in _row_blocks(D):
        for j, eps in enumerate(eps_values):
            counts[start : start + rows.shape[0], j] = _within(rows, eps, similarity).sum(axis=1)
    dense = counts >= min_pts

    table = np.full((n, len(eps_values)), PointClass.NOISE, dtype=np.int8)
    for start, rows in _row_blocks(D):
        stop = start + rows.shape[0]
        for j, eps in enumerate(eps_values):
            near_dense = (_within(rows, eps, similarity) & dense[:, j][None, :]).any(axis=1)
            col = table[start:stop, j]
            col[near_dense] = PointClass.BORDER
            col[dense[start:stop, j]] = PointClass.DENSE
    return table


def dbscan_classify(D, params: DbscanParams, similarity: bool = False) -> np.ndarray:
    """Dense/border/noise code per point (see ``PointClass``).

    A point's neighbourhood includes itself. With ``similarity=True`` the
    matrix holds similarities and ``j`` is a neighbour of ``i`` when
    ``D[i, j] >= eps``.
    """
    return _classify_many(D, [params.eps], params.min_pts, similarity)[:, 0]


def dbscan_cluster(D, params: DbscanParams, similarity: bool = False) -> np.ndarray:
    """Cluster labels 0..c-1 by density reachability; noise gets -1.

    Clusters are grown from dense points in index order; a border point
    joins the first cluster that reaches it.
    """
    n = _size(D)
    classes = dbscan_classify(D, params, similarity)
    dense = classes == PointClass.DENSE
    square = D.square() if isinstance(D, DistanceMatrix) else np.asarray(D)
    labels = np.full(n, -1, dtype=np.int64)
    cluster = 0
    for seed in range(n):
        if not dense[seed] or labels[seed] >= 0:
            continue
        labels[seed] = cluster
        queue = deque([seed])
        while queue:
            p = queue.popleft()
            for q in np.flatnonzero(_within(square[p], params.eps, similarity)):
                if labels[q] >= 0:
                    continue
                labels[q] = cluster
                if dense[q]:
                    queue.append(q)
        cluster += 1
    return labels


def classify_over_eps(D, eps_list: Sequence[float], min_pts: int, similarity: bool = False) -> np.ndarray:
    """n x runs classification table, one DBSCAN pass per radius, fixed min_pts."""
    eps_list = list(eps_list)
    if not eps_list:
        raise ValueError("eps_list is empty")
    for eps in eps_list:
        DbscanParams(eps, min_pts)
    return _classify_many(D, eps_list, min_pts, similarity)


def vote_noise(table) -> np.ndarray:
    """True where a point is border-or-noise in strictly more than half the runs."""
    table = np.asarray(table)
    if table.ndim != 2 or table.shape[1] == 0:
        raise ValueError("classification table must be n x runs with runs >= 1")
    not_dense = (table != PointClass.DENSE).sum(axis=1)
    return 2 * not_dense > table.shape[1]


def default_eps_list(D: DistanceMatrix, quantiles=(0.05, 0.60), num: int = 20) -> list[float]:
    """Radii at evenly spaced quantiles of the informative distances.

    Only distances strictly between 0 and 1 are used: 0 is an exact
    duplicate and 1 means disjoint vocabulary.
    """
    vals = D.packed[(D.packed > 0) & (D.packed < 1)]
    if vals.size == 0:
        vals = D.packed[D.packed > 0]
    if vals.size == 0:
        return [1e-9] * num
    qs = np.linspace(quantiles[0], quantiles[1], num)
    eps = np.quantile(vals, qs)
    return [float(max(e, 1e-12)) for e in eps]
