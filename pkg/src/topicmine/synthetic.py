"""Seeded generators for planted-topic corpora and block-model consensus
matrices. Used by the test suite and the ``mine synth`` command."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aeiou"


def pseudo_words(count: int, rng: np.random.Generator, syllables=(2, 3), taken=None) -> list[str]:
    """Distinct pronounceable nonsense words that survive stemming unchanged
    (each ends in a vowel other than ``e``/``y``)."""
    taken = set() if taken is None else taken
    out = []
    while len(out) < count:
        s = rng.integers(syllables[0], syllables[1] + 1)
        w = "".join(_CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(s))
        if w[-1] == "e":
            w = w[:-1] + "o"
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


@dataclass
class PlantedCorpus:
    texts: list[str]
    labels: np.ndarray  # planted topic per text, -1 for scatter
    topic_words: list[list[str]]
    background: list[str]


def planted_corpus(
    n_docs: int = 2000,
    n_topics: int = 9,
    words_per_topic: int = 30,
    shared_words: int = 4,
    background_words: int = 40,
    background_rate: float = 0.15,
    doc_len: tuple[int, int] = (8, 14),
    topic_sizes=None,
    topic_spread=None,
    scatter_fraction: float = 0.0,
    scatter_vocab: int = 0,
    seed: int = 0,
) -> PlantedCorpus:
    """Short documents drawn from planted topics.

    Topic ``j`` owns ``words_per_topic`` words plus the first
    ``shared_words`` words of topic ``j+1`` (cyclic), so neighbouring topics
    overlap. Word choice within a topic follows a Zipf-like law; a
    ``topic_spread`` above 1 flattens it and widens the vocabulary, giving a
    lower-density topic. Scatter documents draw uniformly from every word,
    or, with ``scatter_vocab > 0``, from that many words of their own plus
    the background (off-topic chatter).
    """
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    own = [pseudo_words(words_per_topic, rng, taken=taken) for _ in range(n_topics)]
    background = pseudo_words(background_words, rng, taken=taken)
    vocab = [own[j] + own[(j + 1) % n_topics][:shared_words] for j in range(n_topics)]
    spread = [1.0] * n_topics if topic_spread is None else list(topic_spread)
    for j, s in enumerate(spread):
        if s > 1:
            vocab[j] = vocab[j] + pseudo_words(int(words_per_topic * (s - 1)), rng, taken=taken)

    n_scatter = int(round(scatter_fraction * n_docs))
    n_topical = n_docs - n_scatter
    if topic_sizes is None:
        sizes = np.full(n_topics, n_topical // n_topics)
        sizes[: n_topical - sizes.sum()] += 1
    else:
        sizes = np.asarray(topic_sizes)
    labels = np.concatenate([np.full(s, j) for j, s in enumerate(sizes)] + [np.full(n_scatter, -1)])
    rng.shuffle(labels)

    everything = [w for v in vocab for w in v] + background
    chatter = pseudo_words(scatter_vocab, rng, syllables=(2, 4), taken=taken) if scatter_vocab else []
    texts = []
    for lab in labels:
        length = rng.integers(doc_len[0], doc_len[1] + 1)
        if lab < 0 and chatter:
            words = [background[rng.integers(len(background))] if rng.random() < background_rate
                     else chatter[rng.integers(len(chatter))] for _ in range(length)]
        elif lab < 0:
            words = list(rng.choice(everything, size=length))
        else:
            v = vocab[lab]
            ranks = np.arange(1, len(v) + 1)
            p = ranks ** (-1.0 / spread[lab])
            p /= p.sum()
            words = []
            for _ in range(length):
                if rng.random() < background_rate:
                    words.append(background[rng.integers(len(background))])
                else:
                    words.append(v[rng.choice(len(v), p=p)])
        texts.append(" ".join(words))
    return PlantedCorpus(texts, labels, vocab, background)


def block_consensus(sizes, runs: int = 11, flip: float = 0.0, seed: int = 0):
    """Block-diagonal consensus counts with ``runs`` inside blocks.

    A fraction ``flip`` of the within-block pairs is flipped to 0
    (symmetrically), which keeps the blocks disconnected from each other.
    Returns ``(counts, block_labels)``.
    """
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.full(s, b) for b, s in enumerate(sizes)])
    n = labels.size
    same = labels[:, None] == labels[None, :]
    upper = np.triu(same, 1)
    iu, ju = np.nonzero(upper)
    drop = rng.random(iu.size) < flip
    counts = np.where(same, runs, 0).astype(np.int64)
    counts[iu[drop], ju[drop]] = 0
    counts[ju[drop], iu[drop]] = 0
    np.fill_diagonal(counts, runs)
    return counts, labels
