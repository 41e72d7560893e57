"""Synthetic corpora and embedding matrices shared across test modules."""

from __future__ import annotations

import numpy as np

from altext.corpus import Corpus, Document, EmbeddingMatrix


def make_corpus(labels: list[int], prefix: str = "d", texts: list[str] | None = None) -> Corpus:
    docs = tuple(
        Document(
            id=f"{prefix}{i}",
            text=texts[i] if texts else f"document number {i}",
            true_label=label,
        )
        for i, label in enumerate(labels)
    )
    return Corpus(documents=docs, name="synthetic")


def gaussian_corpus(
    n_per_class: int, dims: int, separation: float, seed: int
) -> tuple[Corpus, EmbeddingMatrix]:
    """Two Gaussian blobs separated along the first axis, one doc per point."""
    rng = np.random.default_rng(seed)
    neg = rng.normal(loc=0.0, scale=1.0, size=(n_per_class, dims))
    pos = rng.normal(loc=0.0, scale=1.0, size=(n_per_class, dims))
    neg[:, 0] -= separation / 2
    pos[:, 0] += separation / 2
    values = np.vstack([neg, pos])
    labels = [0] * n_per_class + [1] * n_per_class
    order = rng.permutation(len(labels))
    values = values[order]
    labels = [labels[i] for i in order]
    corpus = make_corpus(labels)
    matrix = EmbeddingMatrix(
        values=values, ids=tuple(corpus.ids), model="gaussian", mode="n/a"
    )
    return corpus, matrix
