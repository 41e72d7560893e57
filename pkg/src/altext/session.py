"""Live-oracle annotation sessions.

A session walks SEEDING -> ACTIVE -> EXPORT-ONLY with no way back. The seed
batch is drawn class-blind (no ground truth exists in live mode); each
posted batch retrains the classifier, refreshes machine labels and margins,
and selects the next query batch until the label budget is exhausted or the
pool empties. Ground-truth accuracy is unavailable, so status reports a
margin-confidence histogram instead.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import strategies as strat
from . import svm
from .corpus import Corpus, EmbeddingMatrix, LabelPool, seed_candidates
from .engine import DEFAULT_BATCH_SIZE, DEFAULT_BUDGET, DEFAULT_CV_CADENCE, select_batch
from .svm import SvmParams

HISTOGRAM_BINS = 10


class Phase(str, Enum):
    SEEDING = "SEEDING"
    ACTIVE = "ACTIVE"
    EXPORT_ONLY = "EXPORT-ONLY"


class UnknownDocumentError(ValueError):
    """A posted label references a document that is not in the pending batch."""


class IncompleteBatchError(ValueError):
    """Posted labels do not cover the pending batch exactly."""


class PhaseError(RuntimeError):
    """Operation not valid in the session's current phase."""


@dataclass
class RoundRecord:
    round_index: int
    labelled_count: int
    tuned: bool
    c_value: float


@dataclass
class LiveSession:
    session_id: str
    corpus: Corpus
    matrix: EmbeddingMatrix
    strategy: str = "uncertainty"
    batch_size: int = DEFAULT_BATCH_SIZE
    budget: int = DEFAULT_BUDGET
    cv_cadence: int = DEFAULT_CV_CADENCE
    seed: int = 0

    phase: Phase = Phase.SEEDING
    pool: LabelPool = None  # type: ignore[assignment]
    pending: Optional[strat.QueryBatch] = None
    history: list[RoundRecord] = field(default_factory=list)
    machine_margins: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in strat.STRATEGY_NAMES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; valid names: "
                f"{', '.join(strat.STRATEGY_NAMES)}"
            )
        self.matrix.check_alignment(self.corpus)
        if self.budget > len(self.corpus):
            self.budget = len(self.corpus)
        self._X = np.asarray(self.matrix.values, dtype=np.float64)
        self._master = np.random.default_rng(self.seed)
        self._lock = threading.Lock()
        self._params: Optional[SvmParams] = None
        self._model: Optional[svm.SvmModel] = None
        self._round_index = 0
        self._egal = (
            strat.egal_params(self._X) if self.strategy == "egal" else None
        )
        self.pool = LabelPool.from_corpus(self.corpus)
        seed_ids = seed_candidates(
            self.corpus, int(self._master.integers(0, 2**31 - 1)), size=self.batch_size
        )
        self.pending = strat.QueryBatch(
            doc_ids=tuple(seed_ids), strategy="seed", scores=(0.0,) * len(seed_ids)
        )

    @property
    def model_available(self) -> bool:
        return self._model is not None

    def pending_documents(self) -> list[tuple[str, str]]:
        if self.pending is None:
            return []
        return [
            (doc_id, self.corpus.documents[self.corpus.index_of(doc_id)].text)
            for doc_id in self.pending.doc_ids
        ]

    def post_labels(self, labels: dict[str, int]) -> None:
        """Apply one batch of human labels atomically and advance the round.

        Raises without mutating state when the batch does not match the
        pending ids exactly or any label is out of range.
        """
        with self._lock:
            if self.phase == Phase.EXPORT_ONLY or self.pending is None:
                raise PhaseError("session accepts no further labels")
            pending_ids = set(self.pending.doc_ids)
            posted_ids = set(labels)
            unknown = posted_ids - pending_ids
            if unknown:
                raise UnknownDocumentError(
                    f"labels posted for non-pending ids: {sorted(unknown)[:5]}"
                )
            missing = pending_ids - posted_ids
            if missing:
                raise IncompleteBatchError(
                    f"labels missing for pending ids: {sorted(missing)[:5]}"
                )
            for doc_id, label in labels.items():
                if label not in (0, 1):
                    raise ValueError(f"label for {doc_id!r} must be 0 or 1, got {label!r}")

            self.pool.assign_batch(labels)
            self._retrain()
            self.history.append(
                RoundRecord(
                    round_index=self._round_index,
                    labelled_count=self.pool.labelled_count,
                    tuned=self._round_index % self.cv_cadence == 0,
                    c_value=self._params.C,
                )
            )
            self._round_index += 1

            if self.pool.labelled_count >= self.budget or not self.pool.unlabelled:
                self.phase = Phase.EXPORT_ONLY
                self.pending = None
                return
            remaining = self.budget - self.pool.labelled_count
            self.pending = select_batch(
                self.strategy,
                self.corpus,
                self._X,
                self.pool,
                self._model,
                batch_size=min(self.batch_size, remaining),
                seed=int(self._master.integers(0, 2**31 - 1)),
                committee_c=self._params.C,
                egal_params=self._egal,
            )
            self.phase = Phase.ACTIVE

    def _retrain(self) -> None:
        ids = self.corpus.ids
        l_rows = [i for i, doc_id in enumerate(ids) if doc_id in self.pool.labelled]
        labels = np.array([self.pool.labelled[ids[i]] for i in l_rows], dtype=np.int64)
        y = np.where(labels == 1, 1.0, -1.0)
        tune = self._round_index % self.cv_cadence == 0
        cv_seed = int(self._master.integers(0, 2**31 - 1))
        train_seed = int(self._master.integers(0, 2**31 - 1))
        if tune or self._params is None:
            self._params = svm.cross_validate(
                self._X[l_rows], y, self._params or SvmParams(), seed=cv_seed
            )
        self._model = svm.train(self._X[l_rows], y, self._params.C, seed=train_seed)

        u_rows = [i for i, doc_id in enumerate(ids) if doc_id in self.pool.unlabelled]
        margins = svm.decision(self._model, self._X[u_rows]) if u_rows else np.zeros(0)
        self.machine_margins = {
            ids[row]: float(margin) for row, margin in zip(u_rows, margins)
        }
        self.pool.set_machine_labels(
            {doc_id: int(margin >= 0) for doc_id, margin in self.machine_margins.items()}
        )

    def confidence_histogram(self) -> dict:
        """Histogram of |margin| over current machine predictions."""
        values = np.abs(np.array(list(self.machine_margins.values()), dtype=np.float64))
        if values.size == 0:
            edges = np.linspace(0.0, 1.0, HISTOGRAM_BINS + 1)
            counts = np.zeros(HISTOGRAM_BINS, dtype=np.int64)
        else:
            top = max(float(values.max()), 1e-9)
            counts, edges = np.histogram(values, bins=HISTOGRAM_BINS, range=(0.0, top))
        return {"bin_edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}

    def status(self) -> dict:
        return {
            "session_id": self.session_id,
            "phase": self.phase.value,
            "labelled": self.pool.labelled_count,
            "budget": self.budget,
            "corpus_size": len(self.corpus),
            "pending_count": len(self.pending.doc_ids) if self.pending else 0,
            "strategy": self.strategy,
            "confidence_histogram": self.confidence_histogram(),
            "rounds": [
                {
                    "round": r.round_index,
                    "labelled": r.labelled_count,
                    "tuned": r.tuned,
                    "C": r.c_value,
                }
                for r in self.history[-10:]
            ],
        }

    def export(self) -> list[dict]:
        """One record per corpus document, in corpus order.

        Human rows carry the oracle's label; the rest carry the classifier's
        current prediction and margin. Requires at least one trained model.
        """
        if self._model is None:
            raise PhaseError("nothing to export before the first labelled batch")
        rows = []
        for doc_id in self.corpus.ids:
            if doc_id in self.pool.labelled:
                rows.append(
                    {
                        "id": doc_id,
                        "label": self.pool.labelled[doc_id],
                        "source": "human",
                        "margin": None,
                    }
                )
            else:
                rows.append(
                    {
                        "id": doc_id,
                        "label": self.pool.machine[doc_id],
                        "source": "machine",
                        "margin": round(self.machine_margins[doc_id], 6),
                    }
                )
        return rows
