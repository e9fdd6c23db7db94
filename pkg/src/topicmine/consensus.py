"""Consensus (co-clustering) matrix and the ensemble noise-removal voters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dbscan import classify_over_eps, vote_noise
from .errors import LengthMismatch


@dataclass(frozen=True)
class ConsensusMatrix:
    """``counts[i, j]``: number of runs that put points i and j together.

    The diagonal equals ``runs``.
    """

    counts: np.ndarray
    runs: int

    @property
    def n(self):
        return self.counts.shape[0]

    def off_diagonal(self) -> np.ndarray:
        c = self.counts.astype(np.int64)
        np.fill_diagonal(c, 0)
        return c

    def subset(self, keep) -> "ConsensusMatrix":
        keep = np.asarray(keep)
        return ConsensusMatrix(self.counts[np.ix_(keep, keep)], self.runs)


@dataclass(frozen=True)
class NoiseVerdict:
    alg1: np.ndarray
    alg2: np.ndarray
    alg3: np.ndarray
    combined: np.ndarray

    def kept(self) -> np.ndarray:
        return np.flatnonzero(~self.combined)


def _labels_of(a):
    return np.asarray(getattr(a, "labels", a))


def build_consensus(assignments: Sequence) -> ConsensusMatrix:
    """Sum co-membership indicator matrices over all assignments.

    Accepts ClusterAssignment objects or plain label arrays. Negative labels
    (unassigned) never co-cluster with anything but themselves.
    """
    if not assignments:
        raise ValueError("no assignments")
    label_sets = [_labels_of(a) for a in assignments]
    n = len(label_sets[0])
    if any(len(l) != n for l in label_sets):
        raise LengthMismatch("assignments cover different numbers of points")
    runs = len(label_sets)
    dtype = np.uint16 if runs < np.iinfo(np.uint16).max else np.int64
    counts = np.zeros((n, n), dtype=dtype)
    block = 1024
    for labels in label_sets:
        valid = labels >= 0
        for start in range(0, n, block):
            stop = min(n, start + block)
            eq = labels[start:stop, None] == labels[None, :]
            eq &= valid[start:stop, None]
            counts[start:stop] += eq
    # unassigned points still co-cluster with themselves
    diag = np.arange(n)
    counts[diag, diag] = runs
    return ConsensusMatrix(counts, runs)


def noise_alg1_consensus(C: ConsensusMatrix, drop_tol: float = 0.10, threshold: str = "rowsum_mean") -> np.ndarray:
    """Flag points whose thresholded co-clustering row sum is below average.

    Entries with ``count <= drop_tol * runs`` are zeroed, the diagonal is
    ignored. ``threshold="rowsum_mean"`` compares each row sum with the mean
    row sum; ``"entry_mean"`` compares it with the mean off-diagonal entry.
    """
    if not 0 <= drop_tol < 1:
        raise ValueError("drop_tol must be in [0, 1)")
    c = C.off_diagonal()
    c[c <= drop_tol * C.runs] = 0
    rowsums = c.sum(axis=1)
    if threshold == "rowsum_mean":
        cut = rowsums.mean()
    elif threshold == "entry_mean":
        n = C.n
        cut = rowsums.sum() / (n * (n - 1)) if n > 1 else 0.0
    else:
        raise ValueError(f"unknown threshold mode {threshold!r}")
    return rowsums < cut


def noise_alg2_dbscan_distance(D, eps_list: Sequence[float], min_pts: int) -> np.ndarray:
    """DBSCAN over a range of radii on the cosine distance matrix, then vote."""
    return vote_noise(classify_over_eps(D, eps_list, min_pts))


def default_eps_counts(runs: int) -> list[int]:
    return list(range(max(1, math.ceil(0.25 * runs)), runs + 1))


def noise_alg3_dbscan_consensus(C: ConsensusMatrix, eps_counts: Sequence[int], min_pts: int) -> np.ndarray:
    """DBSCAN on the consensus matrix: j neighbours i when they co-cluster at
    least ``eps`` times. Vote as in the distance version."""
    eps_counts = list(eps_counts)
    if not eps_counts:
        raise ValueError("eps_counts is empty")
    for e in eps_counts:
        if not 1 <= e <= C.runs:
            raise ValueError(f"eps count {e} outside [1, {C.runs}]")
    table = classify_over_eps(C.counts, eps_counts, min_pts, similarity=True)
    return vote_noise(table)


def combine_noise(f1, f2, f3) -> NoiseVerdict:
    """Majority vote: noise when at least two of the three flags are set."""
    f1, f2, f3 = (np.asarray(f, dtype=bool) for f in (f1, f2, f3))
    if not f1.shape == f2.shape == f3.shape:
        raise LengthMismatch("noise flag vectors differ in length")
    votes = f1.astype(np.int8) + f2 + f3
    return NoiseVerdict(f1, f2, f3, votes >= 2)


def consensus_edges(C: ConsensusMatrix, threshold: int):
    """Yield ``(i, j, count)`` with i < j for pairs co-clustered more than
    ``threshold`` times."""
    c = C.off_diagonal()
    iu, ju = np.nonzero(np.triu(c > threshold, 1))
    for i, j in zip(iu.tolist(), ju.tolist()):
        yield i, j, int(c[i, j])


def write_consensus_tsv(C: ConsensusMatrix, path, threshold: int = 0) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("i\tj\tcount\n")
        for i, j, c in consensus_edges(C, threshold):
            fh.write(f"{i}\t{j}\t{c}\n")
