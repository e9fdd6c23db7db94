"""Document ingestion, text normalization, duplicate removal and TF-IDF."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from nltk.stem.porter import PorterStemmer

from .errors import AllDocumentsEmpty, TopicMineError

_URL = re.compile(r"(?:https?://|www\.)\S+")
_MENTION = re.compile(r"@\w+")
_APOSTROPHE = re.compile(r"['’]")
# \w keeps accented letters; underscores count as separators
_SPLIT = re.compile(r"[\W_]+")

_stemmer = PorterStemmer()


@dataclass(frozen=True)
class Document:
    id: int
    raw: str
    tokens: tuple[str, ...]
    source_id: str | None = None


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_frequency: tuple[int, ...]

    def __len__(self):
        return len(self.terms)

    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


@dataclass(frozen=True)
class TermDocMatrix:
    """Sparse m x n TF-IDF matrix; column d is document ``doc_ids[d]``."""

    matrix: sp.csc_matrix
    doc_ids: tuple[int, ...]
    column_norms: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]

    def empty_columns(self) -> np.ndarray:
        return np.flatnonzero(np.diff(self.matrix.indptr) == 0)


def load_stoplist(path: str | Path) -> frozenset[str]:
    """Read a stop list: one term per line, ``#`` starts a comment."""
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                # match the tokenizer, which drops apostrophes
                terms.add(_APOSTROPHE.sub("", line))
    return frozenset(terms)


def default_stoplist() -> frozenset[str]:
    """English and Spanish lists shipped with the package, merged."""
    terms: set[str] = set()
    for name in ("stop_en.txt", "stop_es.txt"):
        with resources.as_file(resources.files("topicmine.data") / name) as path:
            terms |= load_stoplist(path)
    return frozenset(terms)


def tokenize(
    text: str,
    stoplist: Iterable[str] = (),
    stem: bool = True,
    strip_urls: bool = True,
    strip_mentions: bool = True,
) -> list[str]:
    """Lowercase, strip URLs/mentions/punctuation, drop stop terms, stem.

    Hashtags keep their word (``#brasil2014`` -> ``brasil2014``).
    """
    text = text.lower()
    if strip_urls:
        text = _URL.sub(" ", text)
    if strip_mentions:
        text = _MENTION.sub(" ", text)
    text = _APOSTROPHE.sub("", text)
    stop = stoplist if isinstance(stoplist, (set, frozenset)) else set(stoplist)
    out = []
    for tok in _SPLIT.split(text):
        if not tok or tok in stop:
            continue
        if stem:
            tok = _stemmer.stem(tok)
            if not tok or tok in stop:
                continue
        out.append(tok)
    return out


def make_corpus(
    texts: Sequence[str],
    stoplist: Iterable[str] | None = None,
    stem: bool = True,
    source_ids: Sequence[str] | None = None,
) -> list[Document]:
    if stoplist is None:
        stoplist = default_stoplist()
    stoplist = frozenset(stoplist)
    docs = []
    for i, text in enumerate(texts):
        sid = source_ids[i] if source_ids is not None else None
        docs.append(Document(i, text, tuple(tokenize(text, stoplist, stem)), sid))
    return docs


def read_texts(path: str | Path, fmt: str = "lines") -> tuple[list[str], list[str] | None]:
    """Read raw documents from a UTF-8 file.

    ``fmt="lines"``: one document per line, blank lines skipped.
    ``fmt="tsv"``: ``id<TAB>text`` per line.
    """
    texts: list[str] = []
    ids: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if fmt == "lines":
                if line.strip():
                    texts.append(line)
            elif fmt == "tsv":
                if not line.strip():
                    continue
                parts = line.split("\t", 1)
                if len(parts) != 2:
                    raise TopicMineError(f"{path}:{lineno}: expected id<TAB>text")
                ids.append(parts[0])
                texts.append(parts[1])
            else:
                raise ValueError(f"unknown input format {fmt!r}")
    return texts, (ids if fmt == "tsv" else None)


def remove_duplicates(corpus: Sequence[Document]) -> tuple[list[Document], int]:
    """Collapse documents with identical token multisets to the earliest one."""
    seen = set()
    kept = []
    for doc in corpus:
        key = tuple(sorted(Counter(doc.tokens).items()))
        if key in seen:
            continue
        seen.add(key)
        kept.append(doc)
    return kept, len(corpus) - len(kept)


def build_tdm(corpus: Sequence[Document]) -> tuple[TermDocMatrix, Vocabulary]:
    """TF-IDF term-document matrix with unit-norm columns.

    Weight is raw count times ``ln(n / df)``. Terms present in every
    document carry no weight and are left out of the vocabulary.
    """
    n = len(corpus)
    df: Counter[str] = Counter()
    order: dict[str, int] = {}
    for doc in corpus:
        for t in doc.tokens:
            if t not in order:
                order[t] = len(order)
        df.update(set(doc.tokens))

    terms = [t for t in order if df[t] < n]
    if not terms:
        raise AllDocumentsEmpty("no term carries nonzero TF-IDF weight")
    row_of = {t: i for i, t in enumerate(terms)}
    idf = np.array([math.log(n / df[t]) for t in terms])

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for doc in corpus:
        counts = Counter(t for t in doc.tokens if t in row_of)
        rows = sorted(row_of[t] for t in counts)
        for r in rows:
            indices.append(r)
            data.append(counts[terms[r]] * idf[r])
        indptr.append(len(indices))

    mat = sp.csc_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(terms), n),
    )
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=0)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    mat = (mat @ sp.diags(scale)).tocsc()
    mat.sort_indices()
    new_norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=0)).ravel())

    vocab = Vocabulary(tuple(terms), tuple(df[t] for t in terms))
    return TermDocMatrix(mat, tuple(d.id for d in corpus), new_norms), vocab
