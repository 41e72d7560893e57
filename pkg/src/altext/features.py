"""Frequency-based and word-vector document representations.

Preprocessing lowercases, splits on non-alphanumeric runs, drops stopwords,
and prunes terms that occur fewer than 10 times in the corpus or in fewer
than 5 documents. TF-IDF rows use raw term counts weighted by smoothed
inverse document frequency and are L2-normalized; averaged word vectors take
the arithmetic mean of in-lexicon token vectors with multiplicity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .corpus import Corpus, EmbeddingMatrix

_TOKEN_RE = re.compile(r"[a-z0-9]+")

MIN_TERM_COUNT = 10
MIN_DOC_FREQ = 5


class EmptyVocabularyError(ValueError):
    """Raised when stopword removal plus pruning leaves no terms at all."""


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    term_index: dict[str, int]
    doc_freq: np.ndarray  # documents containing each term
    total_count: np.ndarray  # corpus-wide occurrences of each term

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class WordVectorLexicon:
    dims: int
    vectors: dict[str, np.ndarray]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def load_stopwords(path: str | Path | None = None) -> set[str]:
    """Read a stoplist file (one token per line); default is the shipped list."""
    if path is None:
        data = resources.files("altext").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        data = Path(path).read_text(encoding="utf-8")
    return {line.strip().lower() for line in data.splitlines() if line.strip()}


def preprocess(
    corpus: Corpus,
    stopwords: set[str],
    min_term_count: int = MIN_TERM_COUNT,
    min_doc_freq: int = MIN_DOC_FREQ,
) -> tuple[Vocabulary, list[list[str]]]:
    """Tokenize the corpus and build the pruned vocabulary.

    Returns the vocabulary and one token stream per document, each retaining
    only vocabulary terms.
    """
    raw_streams = [
        [tok for tok in tokenize(doc.text) if tok not in stopwords] for doc in corpus
    ]
    counts: dict[str, int] = {}
    dfreq: dict[str, int] = {}
    for stream in raw_streams:
        for tok in stream:
            counts[tok] = counts.get(tok, 0) + 1
        for tok in set(stream):
            dfreq[tok] = dfreq.get(tok, 0) + 1

    kept = sorted(
        t for t, c in counts.items() if c >= min_term_count and dfreq[t] >= min_doc_freq
    )
    if not kept:
        raise EmptyVocabularyError(
            f"pruning (count >= {min_term_count}, doc freq >= {min_doc_freq}) "
            "left an empty vocabulary"
        )
    term_index = {t: i for i, t in enumerate(kept)}
    vocab = Vocabulary(
        terms=tuple(kept),
        term_index=term_index,
        doc_freq=np.array([dfreq[t] for t in kept], dtype=np.int64),
        total_count=np.array([counts[t] for t in kept], dtype=np.int64),
    )
    streams = [[tok for tok in stream if tok in term_index] for stream in raw_streams]
    return vocab, streams


def tfidf(
    corpus: Corpus, vocabulary: Vocabulary, token_streams: list[list[str]]
) -> EmbeddingMatrix:
    """Term-count x smoothed-idf rows, L2-normalized.

    idf(t) = ln((1 + D) / (1 + df_t)) + 1. A document whose tokens were all
    pruned keeps an all-zero row.
    """
    n_docs = len(corpus)
    if len(token_streams) != n_docs:
        raise ValueError("one token stream per document required")
    n_terms = len(vocabulary)
    idf = np.log((1.0 + n_docs) / (1.0 + vocabulary.doc_freq.astype(np.float64))) + 1.0

    values = np.zeros((n_docs, n_terms), dtype=np.float64)
    for row, stream in enumerate(token_streams):
        for tok in stream:
            values[row, vocabulary.term_index[tok]] += 1.0
    values *= idf
    norms = np.linalg.norm(values, axis=1)
    nonzero = norms > 0
    values[nonzero] /= norms[nonzero, None]
    return EmbeddingMatrix(values=values, ids=tuple(corpus.ids), model="tfidf", mode="n/a")


def load_word_vectors(path: str | Path) -> WordVectorLexicon:
    """Parse a text lexicon: one 'word v1 ... vD' line per word, space-separated."""
    vectors: dict[str, np.ndarray] = {}
    dims: int | None = None
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            word, comps = parts[0], parts[1:]
            if dims is None:
                dims = len(comps)
            elif len(comps) != dims:
                raise ValueError(
                    f"{path}:{lineno}: expected {dims} components, got {len(comps)}"
                )
            vectors[word] = np.array([float(c) for c in comps], dtype=np.float64)
    if dims is None:
        raise ValueError(f"{path}: no vectors found")
    return WordVectorLexicon(dims=dims, vectors=vectors)


def avg_word_vectors(corpus: Corpus, lexicon: WordVectorLexicon) -> EmbeddingMatrix:
    """Mean of in-lexicon token vectors per document (duplicates counted).

    Documents with no in-lexicon token get a zero row.
    """
    values = np.zeros((len(corpus), lexicon.dims), dtype=np.float64)
    for row, doc in enumerate(corpus):
        acc = np.zeros(lexicon.dims, dtype=np.float64)
        hits = 0
        for tok in tokenize(doc.text):
            vec = lexicon.vectors.get(tok)
            if vec is not None:
                acc += vec
                hits += 1
        if hits:
            values[row] = acc / hits
    return EmbeddingMatrix(values=values, ids=tuple(corpus.ids), model="wordvec", mode="n/a")
