"""k-means with cosine distance.

Points are the columns of the input matrix (TF-IDF columns, or rows of a
symmetric consensus matrix, which are the same as its columns).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BadK, ZeroVector


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: np.ndarray
    objective: float
    history: tuple[float, ...] = ()
    iterations: int = 0
    empty_clusters: tuple[int, ...] = ()
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return len(self.labels)

    def sizes(self) -> np.ndarray:
        valid = self.labels[self.labels >= 0]
        return np.bincount(valid, minlength=self.k)


def _unit_columns(data):
    """Return (points as unit rows, n). Points must be nonzero."""
    if sp.issparse(data):
        X = sp.csr_matrix(data.T, dtype=np.float64)
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    else:
        X = np.asarray(data, dtype=np.float64).T
        norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVector(int(zero[0]))
    if sp.issparse(X):
        X = sp.csr_matrix(sp.diags(1.0 / norms) @ X)
    else:
        X = X / norms[:, None]
    return X, X.shape[0]


def _normalize_rows(M):
    norms = np.linalg.norm(M, axis=1)
    norms[norms == 0] = 1.0
    return M / norms[:, None]


def _similarities(X, centroids):
    # n x k
    if sp.issparse(X):
        sims = np.asarray(X @ centroids.T)
    else:
        sims = X @ centroids.T
    return np.clip(sims, 0.0, 1.0)


def _repair_empty(X, labels, sims, centroids):
    """Give each empty cluster the point farthest from its own centroid.

    The point becomes the new centroid of that cluster. Points are only taken
    from clusters with more than one member, so no new empty cluster appears.
    Modifies ``labels``, ``sims`` and ``centroids`` in place.
    """
    n, k = sims.shape
    counts = np.bincount(labels, minlength=k)
    own = sims[np.arange(n), labels]
    repaired = []
    for c in np.flatnonzero(counts == 0):
        donors = np.flatnonzero(counts[labels] > 1)
        if donors.size == 0:
            break
        # farthest = lowest similarity; ties -> lowest index
        p = donors[np.argmin(own[donors])]
        counts[labels[p]] -= 1
        labels[p] = c
        counts[c] += 1
        row = X[p].toarray().ravel() if sp.issparse(X) else X[p]
        centroids[c] = row
        sims[:, c] = _similarities(X, row[None, :])[:, 0]
        own[p] = sims[p, c]
        repaired.append((int(c), int(p)))
    return repaired


def kmeans(
    data,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-6,
    init: str = "forgy",
) -> ClusterAssignment:
    """Cluster the columns of ``data`` into ``k`` groups by cosine distance.

    ``init="forgy"`` seeds centroids with k distinct data points;
    ``init="space"`` draws them uniformly from the nonnegative unit cube.
    The objective is the sum of point-to-centroid cosine distances and is
    recorded after every assignment step.
    """
    X, n = _unit_columns(data)
    if k < 1 or k > n:
        raise BadK(f"k={k} outside [1, {n}]")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol < 0:
        raise ValueError("tol must be >= 0")

    rng = np.random.default_rng(seed)
    if init == "forgy":
        idx = np.sort(rng.choice(n, size=k, replace=False))
        centroids = X[idx].toarray() if sp.issparse(X) else X[idx].copy()
    elif init == "space":
        centroids = _normalize_rows(rng.random((k, X.shape[1])))
    else:
        raise ValueError(f"unknown init {init!r}")

    history = []
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        sims = _similarities(X, centroids)
        new_labels = np.argmax(sims, axis=1)
        _repair_empty(X, new_labels, sims, centroids)
        own = sims[np.arange(n), new_labels]
        objective = float(np.sum(1.0 - own))
        moved = labels is None or np.any(new_labels != labels)
        labels = new_labels

        onehot = sp.csr_matrix((np.ones(n), (labels, np.arange(n))), shape=(k, n))
        sums = onehot @ X
        sums = sums.toarray() if sp.issparse(sums) else np.asarray(sums)
        new_centroids = _normalize_rows(sums)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids

        history.append(objective)
        if not moved or shift < tol:
            break

    sims = _similarities(X, centroids)
    final_obj = float(np.sum(1.0 - sims[np.arange(n), labels]))
    counts = np.bincount(labels, minlength=k)
    return ClusterAssignment(
        k=k,
        labels=labels.astype(np.int64),
        objective=final_obj,
        history=tuple(history),
        iterations=it,
        empty_clusters=tuple(int(c) for c in np.flatnonzero(counts == 0)),
        seed=seed,
    )


def derive_seed(seed: int, k: int, repeat: int = 0) -> int:
    """Deterministic per-run seed from the master seed, k, and repeat index."""
    ss = np.random.SeedSequence([int(seed), int(k), int(repeat)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def kmeans_sweep(
    data,
    k_range,
    seed: int = 0,
    repeats_per_k: int = 1,
    **kwargs,
) -> list[ClusterAssignment]:
    """One k-means run per k in ``k_range`` (per repeat)."""
    ks = list(k_range)
    if not ks:
        raise BadK("empty k range")
    out = []
    for k in ks:
        for r in range(repeats_per_k):
            out.append(kmeans(data, k, seed=derive_seed(seed, k, r), **kwargs))
    return out
