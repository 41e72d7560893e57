"""Shared fixtures built on the synthetic-data helpers."""

import pytest

from altext.corpus import Corpus, EmbeddingMatrix

from synthetic import gaussian_corpus


@pytest.fixture
def small_gaussians() -> tuple[Corpus, EmbeddingMatrix]:
    return gaussian_corpus(n_per_class=60, dims=5, separation=4.0, seed=7)
