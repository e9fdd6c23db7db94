"""Final topic structures: consensus k-means, NMF topic assignment, top terms
and representative documents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document, Vocabulary
from .errors import EmptyTopic
from .kmeans import ClusterAssignment, kmeans

UNASSIGNED = -1


@dataclass(frozen=True)
class TopicSummary:
    topic_id: int
    top_terms: tuple[tuple[str, float], ...]
    member_docs: tuple[int, ...]
    topic_sentence: int | None


def cluster_consensus(C, k: int, seed: int = 0, **kwargs) -> ClusterAssignment:
    """k-means on the rows of the consensus matrix, cosine distance.

    Points with an all-zero row cannot be placed and are labelled
    ``UNASSIGNED``.
    """
    counts = np.asarray(getattr(C, "counts", C), dtype=np.float64)
    n = counts.shape[0]
    nonzero = np.flatnonzero(counts.any(axis=1))
    labels = np.full(n, UNASSIGNED, dtype=np.int64)
    if nonzero.size == 0:
        return ClusterAssignment(k, labels, 0.0, meta={"residual": n})
    sub = counts[np.ix_(nonzero, nonzero)] if nonzero.size < n else counts
    # rows as points; transpose keeps this right for asymmetric input too
    res = kmeans(sub.T, k, seed=seed, **kwargs)
    labels[nonzero] = res.labels
    return ClusterAssignment(
        k=k,
        labels=labels,
        objective=res.objective,
        history=res.history,
        iterations=res.iterations,
        empty_clusters=res.empty_clusters,
        seed=seed,
        meta={"residual": int(n - nonzero.size)},
    )


def top_terms(W, vocab: Vocabulary, j: int, t: int = 20) -> list[tuple[str, float]]:
    """The ``t`` heaviest terms of topic column ``j``; ties keep vocabulary order."""
    W = np.asarray(W)
    m, k = W.shape
    if not 0 <= j < k:
        raise IndexError(f"topic {j} outside [0, {k})")
    if not 1 <= t <= m:
        raise ValueError(f"t={t} outside [1, {m}]")
    col = W[:, j]
    order = np.argsort(-col, kind="stable")[:t]
    return [(vocab.terms[i], float(col[i])) for i in order]


def assign_topics(H) -> np.ndarray:
    """argmax topic per document column; lowest id wins ties; zero columns
    get ``UNASSIGNED``."""
    H = np.asarray(H)
    labels = np.argmax(H, axis=0).astype(np.int64)
    labels[~(H > 0).any(axis=0)] = UNASSIGNED
    return labels


def topic_sentence(corpus: Sequence[Document], terms: Sequence, H, j: int,
                   labels=None) -> int:
    """Index (position in ``corpus``) of the document of topic ``j`` that
    contains the most distinct top terms.

    Ties go to the larger ``H[j, doc]``, then to the lower position.
    ``labels`` defaults to ``assign_topics(H)``.
    """
    H = np.asarray(H)
    if labels is None:
        labels = assign_topics(H)
    members = np.flatnonzero(np.asarray(labels) == j)
    if members.size == 0:
        raise EmptyTopic(f"topic {j} has no documents")
    wanted = {t[0] if isinstance(t, tuple) else t for t in terms}
    best = None
    for d in members:
        hits = len(wanted.intersection(corpus[d].tokens))
        key = (hits, H[j, d], -d)
        if best is None or key > best[0]:
            best = (key, int(d))
    return best[1]


def summarize(corpus: Sequence[Document], W, H, vocab: Vocabulary, t: int = 20,
              labels=None) -> list[TopicSummary]:
    """One summary per topic. Member ids are ``Document.id`` values."""
    W = np.asarray(W)
    H = np.asarray(H)
    if labels is None:
        labels = assign_topics(H)
    t = min(t, W.shape[0])
    out = []
    for j in range(W.shape[1]):
        terms = top_terms(W, vocab, j, t)
        members = np.flatnonzero(labels == j)
        try:
            pos = topic_sentence(corpus, terms, H, j, labels)
            sentence = corpus[pos].id
        except EmptyTopic:
            sentence = None
        out.append(TopicSummary(j, tuple(terms), tuple(corpus[d].id for d in members), sentence))
    return out
