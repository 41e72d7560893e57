"""Collapsed Gibbs sampler: conservation, determinism, and separability.

The separability check uses the sampler itself as the oracle: documents
drawn from two disjoint vocabularies must concentrate on distinct topics.
"""

import inspect

import numpy as np

import pytest

from altext.features import preprocess
from altext.lda import lda_fit

from synthetic import make_corpus
from altext.corpus import Corpus, Document


def corpus_of(texts):
    return Corpus(tuple(Document(id=f"d{i}", text=t) for i, t in enumerate(texts)))


def disjoint_corpus(seed=0, docs_per_group=30, doc_len=15):
    rng = np.random.default_rng(seed)
    group_a = ["apple", "banana", "cherry", "date", "elder"]
    group_b = ["wolf", "xray", "yak", "zebra", "quill"]
    texts = []
    for _ in range(docs_per_group):
        texts.append(" ".join(rng.choice(group_a, size=doc_len)))
    for _ in range(docs_per_group):
        texts.append(" ".join(rng.choice(group_b, size=doc_len)))
    return corpus_of(texts), docs_per_group


@pytest.fixture(scope="module")
def fitted_small():
    corpus, _ = disjoint_corpus()
    vocab, streams = preprocess(corpus, set())
    model, matrix = lda_fit(corpus, vocab, streams, K=4, iterations=50, seed=3)
    return corpus, vocab, streams, model, matrix


class TestMixtureRows:
    def test_rows_are_distributions(self, fitted_small):
        _, _, _, _, matrix = fitted_small
        assert np.all(matrix.values >= 0)
        assert np.all(np.abs(matrix.values.sum(axis=1) - 1.0) < 1e-9)

    def test_token_count_conserved_across_sweeps(self):
        corpus, _ = disjoint_corpus()
        vocab, streams = preprocess(corpus, set())
        total_tokens = sum(len(s) for s in streams)
        for iterations in (1, 3, 7):
            model, _ = lda_fit(corpus, vocab, streams, K=3, iterations=iterations, seed=1)
            assert model.topic_word_counts.sum() == total_tokens
            assert model.doc_topic_counts.sum() == total_tokens
            # per-document counts match each document's retained token count
            assert np.array_equal(
                model.doc_topic_counts.sum(axis=1),
                np.array([len(s) for s in streams]),
            )

    def test_deterministic_for_seed(self):
        corpus, _ = disjoint_corpus()
        vocab, streams = preprocess(corpus, set())
        _, m1 = lda_fit(corpus, vocab, streams, K=3, iterations=20, seed=42)
        _, m2 = lda_fit(corpus, vocab, streams, K=3, iterations=20, seed=42)
        assert np.array_equal(m1.values, m2.values)
        _, m3 = lda_fit(corpus, vocab, streams, K=3, iterations=20, seed=43)
        assert not np.array_equal(m1.values, m3.values)


class TestSeparability:
    def test_disjoint_vocabularies_concentrate_on_distinct_topics(self):
        corpus, per_group = disjoint_corpus(seed=5)
        vocab, streams = preprocess(corpus, set())
        _, matrix = lda_fit(corpus, vocab, streams, K=2, iterations=500, seed=11)
        dominant = matrix.values.argmax(axis=1)
        group_a, group_b = dominant[:per_group], dominant[per_group:]
        share_a = max(np.mean(group_a == 0), np.mean(group_a == 1))
        share_b = max(np.mean(group_b == 0), np.mean(group_b == 1))
        assert share_a >= 0.9 and share_b >= 0.9
        # the groups must not share their dominant topic
        assert np.bincount(group_a, minlength=2).argmax() != np.bincount(
            group_b, minlength=2
        ).argmax()


class TestEdgeCases:
    def test_document_with_no_retained_tokens_gets_uniform_row(self):
        texts = ["keep keep"] * 5 + ["vanish"]
        corpus = corpus_of(texts)
        vocab, streams = preprocess(corpus, set())  # "vanish" pruned (count 1)
        model, matrix = lda_fit(corpus, vocab, streams, K=4, iterations=10, seed=0)
        assert model.empty_docs == (5,)
        assert np.allclose(matrix.values[5], 0.25)

    def test_default_topic_count_is_300(self):
        assert inspect.signature(lda_fit).parameters["K"].default == 300

    def test_k_below_two_rejected(self):
        corpus = corpus_of(["keep keep"] * 5)
        vocab, streams = preprocess(corpus, set())
        with pytest.raises(ValueError, match="K >= 2"):
            lda_fit(corpus, vocab, streams, K=1, iterations=5)
