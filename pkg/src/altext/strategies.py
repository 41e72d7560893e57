"""Query selection strategies for pool-based active learning.

Every strategy scores the unlabelled pool in one pass and returns the top
``batch_size`` ids (no greedy refitting between picks). Candidate rows are
always presented in corpus order, which doubles as the deterministic
tie-breaker. Cosine similarity backs both density measures, with
cos(x, 0) defined as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import svm
from .svm import SvmModel

STRATEGY_NAMES = ("random", "uncertainty", "qbc", "id", "egal")

DEFAULT_COMMITTEE_SIZE = 5
DEFAULT_EGAL_W = 0.25


@dataclass(frozen=True)
class QueryBatch:
    doc_ids: tuple[str, ...]
    strategy: str
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise ValueError("query batch contains duplicate ids")
        if len(self.scores) != len(self.doc_ids):
            raise ValueError("one score per id required")


@dataclass(frozen=True)
class EgalParams:
    w: float
    alpha: float
    beta: float


def _require_pool(u_ids: Sequence[str]) -> None:
    if len(u_ids) == 0:
        raise ValueError("unlabelled pool is empty")


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    out = np.zeros_like(X, dtype=np.float64)
    nz = norms > 0
    out[nz] = X[nz] / norms[nz, None]
    return out


def _take_top(
    u_ids: Sequence[str],
    sort_keys: list[np.ndarray],
    scores: np.ndarray,
    batch_size: int,
    strategy: str,
) -> QueryBatch:
    """Order candidates by the given keys (last key most significant) and cut."""
    order = np.lexsort(tuple(sort_keys))
    take = order[: min(batch_size, len(u_ids))]
    return QueryBatch(
        doc_ids=tuple(u_ids[i] for i in take),
        strategy=strategy,
        scores=tuple(float(scores[i]) for i in take),
    )


def select_random(u_ids: Sequence[str], batch_size: int, seed: int) -> QueryBatch:
    """Uniform sample without replacement."""
    _require_pool(u_ids)
    rng = np.random.default_rng(seed)
    k = min(batch_size, len(u_ids))
    idx = rng.choice(len(u_ids), size=k, replace=False)
    return QueryBatch(
        doc_ids=tuple(u_ids[i] for i in idx),
        strategy="random",
        scores=(0.0,) * k,
    )


def select_uncertainty(
    model: SvmModel, u_ids: Sequence[str], X_u: np.ndarray, batch_size: int
) -> QueryBatch:
    """Smallest absolute margin first; ties fall back to corpus order."""
    _require_pool(u_ids)
    margins = svm.decision(model, X_u)
    abs_margin = np.abs(margins)
    positions = np.arange(len(u_ids))
    return _take_top(u_ids, [positions, abs_margin], -abs_margin, batch_size, "uncertainty")


def vote_entropy(votes: np.ndarray) -> np.ndarray:
    """Entropy of binary committee votes; votes is (members, docs) in {0, 1}."""
    m = votes.shape[0]
    pos = votes.sum(axis=0) / m
    ent = np.zeros(votes.shape[1], dtype=np.float64)
    for frac in (pos, 1.0 - pos):
        nz = frac > 0
        ent[nz] -= frac[nz] * np.log(frac[nz])
    return ent


def select_qbc(
    X_l: np.ndarray,
    labels: Sequence[int],
    u_ids: Sequence[str],
    X_u: np.ndarray,
    batch_size: int,
    committee_size: int = DEFAULT_COMMITTEE_SIZE,
    seed: int = 0,
    C: float = 1.0,
) -> QueryBatch:
    """Bagging committee disagreement, measured by vote entropy.

    Each member trains on a bootstrap resample of L (size |L|, with
    replacement, redrawn up to 10 times until both classes are present).
    Ties break by ascending mean absolute margin, then corpus order.
    """
    _require_pool(u_ids)
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    if y.shape[0] < 2 or np.unique(y).size < 2:
        raise ValueError("QBC needs at least 2 labelled examples covering both classes")
    rng = np.random.default_rng(seed)
    n = y.shape[0]
    votes = np.zeros((committee_size, len(u_ids)), dtype=np.int64)
    abs_margins = np.zeros((committee_size, len(u_ids)), dtype=np.float64)
    for member in range(committee_size):
        sample = None
        for _ in range(10):
            candidate = rng.integers(0, n, size=n)
            if np.unique(y[candidate]).size == 2:
                sample = candidate
                break
        if sample is None:
            raise ValueError("bootstrap never drew both classes for a committee member")
        member_seed = int(rng.integers(0, 2**31 - 1))
        model = svm.train(X_l[sample], y[sample], C, seed=member_seed)
        margins = svm.decision(model, X_u)
        votes[member] = (margins >= 0).astype(np.int64)
        abs_margins[member] = np.abs(margins)

    ent = vote_entropy(votes)
    mean_abs = abs_margins.mean(axis=0)
    positions = np.arange(len(u_ids))
    return _take_top(u_ids, [positions, mean_abs, -ent], ent, batch_size, "qbc")


def margin_entropy(margins: np.ndarray) -> np.ndarray:
    """Binary entropy of the logistic squash of the margins (0 ln 0 := 0)."""
    p = 1.0 / (1.0 + np.exp(-margins))
    ent = np.zeros_like(p)
    for frac in (p, 1.0 - p):
        nz = frac > 0
        ent[nz] -= frac[nz] * np.log(frac[nz])
    return ent


def select_id(
    model: SvmModel,
    u_ids: Sequence[str],
    X_u: np.ndarray,
    batch_size: int,
    beta_exponent: float = 1.0,
) -> QueryBatch:
    """Information density: margin entropy weighted by mean pool similarity.

    density(x) = mean cosine similarity of x to every pool member (including
    itself), floored at 0 so fractional exponents stay defined; the score is
    entropy * density ** beta_exponent.
    """
    _require_pool(u_ids)
    margins = svm.decision(model, X_u)
    ent = margin_entropy(margins)
    normed = _normalize_rows(np.asarray(X_u, dtype=np.float64))
    # mean_{x' in U} cos(x, x') factorizes through the summed unit vectors
    density = (normed @ normed.sum(axis=0)) / normed.shape[0]
    density = np.maximum(density, 0.0)
    scores = ent * np.power(density, beta_exponent)
    positions = np.arange(len(u_ids))
    return _take_top(u_ids, [positions, -scores], scores, batch_size, "id")


def egal_params(X_all: np.ndarray, w: float = DEFAULT_EGAL_W, block: int = 512) -> EgalParams:
    """Neighbourhood threshold from corpus-wide pairwise similarity statistics.

    alpha = mu - 0.5 * sigma over all distinct unordered pairs (population
    sigma); beta starts equal to alpha.
    """
    normed = _normalize_rows(np.asarray(X_all, dtype=np.float64))
    n = normed.shape[0]
    if n < 2:
        raise ValueError("need at least 2 corpus rows for pairwise statistics")
    total = 0.0
    total_sq = 0.0
    trace = 0.0
    trace_sq = 0.0
    for start in range(0, n, block):
        rows = normed[start : start + block]
        sims = rows @ normed.T
        total += float(sims.sum())
        total_sq += float((sims**2).sum())
        diag = np.einsum("ij,ij->i", rows, rows)
        trace += float(diag.sum())
        trace_sq += float((diag**2).sum())
    pairs = n * (n - 1) / 2
    pair_sum = (total - trace) / 2.0
    pair_sum_sq = (total_sq - trace_sq) / 2.0
    mu = pair_sum / pairs
    var = max(pair_sum_sq / pairs - mu**2, 0.0)
    alpha = mu - 0.5 * var**0.5
    return EgalParams(w=w, alpha=alpha, beta=alpha)


def select_egal(
    X_all: np.ndarray,
    labelled_rows: Sequence[int],
    u_rows: Sequence[int],
    u_ids: Sequence[str],
    batch_size: int,
    params: EgalParams,
) -> QueryBatch:
    """Model-free exploration: densest candidates far enough from L.

    density(x) sums the similarities of x to every corpus member within the
    alpha-neighbourhood (self included); diversity d(x) is the similarity to
    the nearest labelled document. Candidates keep d(x) <= beta; when that
    leaves fewer than batch_size, beta is raised to the w-quantile of the
    d-values over U, and as a last resort to their maximum so a full batch
    always exists.
    """
    _require_pool(u_ids)
    if len(labelled_rows) == 0:
        raise ValueError("EGAL needs at least one labelled document")
    normed = _normalize_rows(np.asarray(X_all, dtype=np.float64))
    u_idx = np.asarray(u_rows, dtype=np.int64)
    l_idx = np.asarray(labelled_rows, dtype=np.int64)

    density = np.zeros(u_idx.shape[0], dtype=np.float64)
    for start in range(0, u_idx.shape[0], 512):
        chunk = u_idx[start : start + 512]
        sims = normed[chunk] @ normed.T  # (chunk, corpus)
        density[start : start + 512] = np.where(sims >= params.alpha, sims, 0.0).sum(axis=1)
    diversity = (normed[u_idx] @ normed[l_idx].T).max(axis=1)

    beta = params.beta
    candidates = diversity <= beta
    if candidates.sum() < min(batch_size, len(u_ids)):
        beta = float(np.quantile(diversity, params.w))
        candidates = diversity <= beta
    if candidates.sum() < min(batch_size, len(u_ids)):
        beta = float(diversity.max())
        candidates = diversity <= beta

    cand_pos = np.flatnonzero(candidates)
    cand_ids = [u_ids[i] for i in cand_pos]
    cand_density = density[cand_pos]
    positions = np.arange(len(cand_ids))
    return _take_top(cand_ids, [positions, -cand_density], cand_density, batch_size, "egal")
