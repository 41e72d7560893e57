"""Topic representation via collapsed Gibbs sampling.

Implements the standard collapsed sampler over a pruned vocabulary: each
token's topic is resampled from p(k) proportional to
(n_dk + alpha) * (n_kt + eta) / (n_k + eta * V). The document representation
is the posterior-mean topic mixture (doc-topic counts plus prior, normalized
to sum 1). Randomness runs on an explicit xorshift64* stream so results are
identical across numpy and numba versions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .corpus import Corpus, EmbeddingMatrix
from .features import Vocabulary

DEFAULT_TOPICS = 300
DEFAULT_SWEEPS = 1000
DEFAULT_ETA = 0.01

_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


@dataclass(frozen=True)
class LdaModel:
    K: int
    alpha: float
    eta: float
    topic_word_counts: np.ndarray  # (K, V)
    doc_topic_counts: np.ndarray  # (D, K)
    seed: int
    iterations: int
    empty_docs: tuple[int, ...]  # rows with zero retained tokens (uniform mixture)


@njit(cache=True, inline="always")
def _next_state(state):
    s = state
    s ^= s >> np.uint64(12)
    s ^= s << np.uint64(25)
    s ^= s >> np.uint64(27)
    return s


@njit(cache=True, inline="always")
def _uniform(state):
    # xorshift64* output: top 53 bits as a double in [0, 1)
    out = state * np.uint64(0x2545F4914F6CDD1D)
    return (out >> np.uint64(11)) * _INV_2_53


@njit(cache=True)
def _gibbs_run(doc_ids, term_ids, z, doc_topic, topic_word, topic_total, alpha, eta, sweeps, state):
    K, V = topic_word.shape
    cumulative = np.empty(K, dtype=np.float64)
    n_tokens = doc_ids.shape[0]
    for _ in range(sweeps):
        for n in range(n_tokens):
            d = doc_ids[n]
            t = term_ids[n]
            k = z[n]
            doc_topic[d, k] -= 1
            topic_word[k, t] -= 1
            topic_total[k] -= 1
            total = 0.0
            for kk in range(K):
                p = (
                    (doc_topic[d, kk] + alpha)
                    * (topic_word[kk, t] + eta)
                    / (topic_total[kk] + eta * V)
                )
                total += p
                cumulative[kk] = total
            state = _next_state(state)
            target = _uniform(state) * total
            lo = 0
            hi = K - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if cumulative[mid] < target:
                    lo = mid + 1
                else:
                    hi = mid
            k = lo
            z[n] = k
            doc_topic[d, k] += 1
            topic_word[k, t] += 1
            topic_total[k] += 1
    return state


@njit(cache=True)
def _init_topics(doc_ids, term_ids, z, doc_topic, topic_word, topic_total, K, state):
    for n in range(doc_ids.shape[0]):
        state = _next_state(state)
        k = int(_uniform(state) * K)
        if k >= K:
            k = K - 1
        z[n] = k
        doc_topic[doc_ids[n], k] += 1
        topic_word[k, term_ids[n]] += 1
        topic_total[k] += 1
    return state


def lda_fit(
    corpus: Corpus,
    vocabulary: Vocabulary,
    token_streams: list[list[str]],
    K: int = DEFAULT_TOPICS,
    iterations: int = DEFAULT_SWEEPS,
    seed: int = 0,
    alpha: float | None = None,
    eta: float = DEFAULT_ETA,
) -> tuple[LdaModel, EmbeddingMatrix]:
    """Fit by collapsed Gibbs sampling and return the doc-topic matrix.

    ``alpha`` defaults to 50 / K. Documents whose tokens were all pruned get
    a uniform 1/K row and are reported in ``LdaModel.empty_docs``.
    """
    if K < 2:
        raise ValueError(f"need K >= 2 topics, got {K}")
    if len(vocabulary) == 0:
        raise ValueError("vocabulary is empty")
    if len(token_streams) != len(corpus):
        raise ValueError("one token stream per document required")
    if alpha is None:
        alpha = 50.0 / K

    doc_ids: list[int] = []
    term_ids: list[int] = []
    for d, stream in enumerate(token_streams):
        for tok in stream:
            doc_ids.append(d)
            term_ids.append(vocabulary.term_index[tok])
    empty_docs = tuple(d for d, stream in enumerate(token_streams) if not stream)

    n_docs = len(corpus)
    n_terms = len(vocabulary)
    doc_arr = np.array(doc_ids, dtype=np.int64)
    term_arr = np.array(term_ids, dtype=np.int64)
    z = np.zeros(doc_arr.shape[0], dtype=np.int64)
    doc_topic = np.zeros((n_docs, K), dtype=np.int64)
    topic_word = np.zeros((K, n_terms), dtype=np.int64)
    topic_total = np.zeros(K, dtype=np.int64)

    # splitmix-style scrambling; zero is a fixed point of xorshift so remap it
    mixed = (seed * 6364136223846793005 + 1442695040888963407) & 0xFFFFFFFFFFFFFFFF
    state = np.uint64(mixed if mixed != 0 else 0x9E3779B97F4A7C15)
    if doc_arr.size:
        # numba hands uint64 results back as Python ints; re-wrap for dispatch
        state = np.uint64(
            _init_topics(doc_arr, term_arr, z, doc_topic, topic_word, topic_total, K, state)
        )
        _gibbs_run(
            doc_arr, term_arr, z, doc_topic, topic_word, topic_total,
            float(alpha), float(eta), int(iterations), state,
        )

    mixture = doc_topic.astype(np.float64) + alpha
    mixture /= mixture.sum(axis=1, keepdims=True)
    for d in empty_docs:
        mixture[d] = 1.0 / K

    model = LdaModel(
        K=K,
        alpha=float(alpha),
        eta=float(eta),
        topic_word_counts=topic_word,
        doc_topic_counts=doc_topic,
        seed=seed,
        iterations=iterations,
        empty_docs=empty_docs,
    )
    matrix = EmbeddingMatrix(values=mixture, ids=tuple(corpus.ids), model="lda", mode="n/a")
    return model, matrix
