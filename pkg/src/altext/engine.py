"""Pool-based active learning loop, adaptive tuning variant, and the
multi-seed experiment runner.

One run: seed the labelled set with 5 documents per class, then alternate
train / evaluate / query / assign until the label budget is spent. SVM
hyperparameters are re-tuned by cross-validation every ``cv_cadence`` rounds
and reused in between. The adaptive variant additionally fine-tunes the
embedding provider every ``cadence_rounds`` rounds and re-embeds the whole
corpus before continuing.

All randomness in a run derives from its integer seed through a fixed draw
order, making results (including serialized CSV bytes) reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import strategies as strat
from . import svm
from .corpus import Corpus, EmbeddingMatrix, LabelPool, load_corpus, load_embeddings, seed_pool
from .features import avg_word_vectors, load_stopwords, load_word_vectors, preprocess, tfidf
from .metrics import LearningCurve, accuracy_plus, summarize
from .providers import AtalParams, EmbeddingProvider, TrainingReport
from .svm import SvmParams

DEFAULT_BATCH_SIZE = 10
DEFAULT_BUDGET = 1000
DEFAULT_SEEDS_PER_CLASS = 5
DEFAULT_CV_CADENCE = 10
DEFAULT_RUN_SEEDS = tuple(range(10))

BUILTIN_REPRESENTATIONS = ("tfidf", "lda", "wordvec")

CURVES_HEADER = ("seed", "round", "labels_used", "accuracy_plus")
SUMMARY_HEADER = ("representation", "strategy", "aulc_mean", "aulc_std", "runs")


class FineTuneError(RuntimeError):
    """Provider fine-tuning failed hard; the partial curve survives on the
    exception for inspection."""

    def __init__(self, message: str, partial_curve: LearningCurve):
        super().__init__(message)
        self.partial_curve = partial_curve


@dataclass(frozen=True)
class RepresentationSpec:
    """Where document vectors come from: a builtin builder, an ALEM file, or
    a remote provider."""

    kind: str  # tfidf | lda | wordvec | alem | provider
    path: Optional[str] = None  # alem file or wordvec lexicon
    url: Optional[str] = None  # provider base url
    mode: str = "avg"  # provider embedding mode
    topics: int = 300
    iterations: int = 1000
    seed: int = 0  # representation build seed (lda)

    @property
    def name(self) -> str:
        if self.kind == "alem":
            return Path(self.path).stem if self.path else "alem"
        if self.kind == "provider":
            return f"provider-{self.mode}"
        return self.kind


@dataclass(frozen=True)
class RunConfig:
    corpus_path: str
    representation: RepresentationSpec
    strategy: str
    batch_size: int = DEFAULT_BATCH_SIZE
    budget: int = DEFAULT_BUDGET
    seeds_per_class: int = DEFAULT_SEEDS_PER_CLASS
    cv_cadence: int = DEFAULT_CV_CADENCE
    seeds: tuple[int, ...] = DEFAULT_RUN_SEEDS
    atal: Optional[AtalParams] = None
    name: str = ""


@dataclass
class ExperimentResult:
    curves: list[LearningCurve]
    failures: list[tuple[int, str]]  # (seed, error message)
    summary: dict[tuple[str, str], tuple[float, float, int]]
    curves_path: Optional[Path] = None
    summary_path: Optional[Path] = None
    manifest_path: Optional[Path] = None


def _as_signed(labels: np.ndarray) -> np.ndarray:
    return np.where(labels == 1, 1.0, -1.0)


def _labelled_rows(corpus: Corpus, pool: LabelPool) -> tuple[list[int], np.ndarray]:
    """Row indices of L in corpus order plus their labels."""
    rows = [i for i, doc_id in enumerate(corpus.ids) if doc_id in pool.labelled]
    labels = np.array([pool.labelled[corpus.ids[i]] for i in rows], dtype=np.int64)
    return rows, labels


def _unlabelled_rows(corpus: Corpus, pool: LabelPool) -> tuple[list[int], list[str]]:
    rows = [i for i, doc_id in enumerate(corpus.ids) if doc_id in pool.unlabelled]
    return rows, [corpus.ids[i] for i in rows]


def select_batch(
    name: str,
    corpus: Corpus,
    X: np.ndarray,
    pool: LabelPool,
    model: Optional[svm.SvmModel],
    batch_size: int,
    seed: int,
    committee_c: float = 1.0,
    egal_params: Optional[strat.EgalParams] = None,
) -> strat.QueryBatch:
    """Dispatch to a strategy by name over the current pool state."""
    u_rows, u_ids = _unlabelled_rows(corpus, pool)
    X_u = X[u_rows]
    if name == "random":
        return strat.select_random(u_ids, batch_size, seed)
    if name == "uncertainty":
        return strat.select_uncertainty(model, u_ids, X_u, batch_size)
    if name == "qbc":
        l_rows, labels = _labelled_rows(corpus, pool)
        return strat.select_qbc(
            X[l_rows], labels, u_ids, X_u, batch_size, seed=seed, C=committee_c
        )
    if name == "id":
        return strat.select_id(model, u_ids, X_u, batch_size)
    if name == "egal":
        l_rows, _ = _labelled_rows(corpus, pool)
        params = egal_params if egal_params is not None else strat.egal_params(X)
        return strat.select_egal(X, l_rows, u_rows, u_ids, batch_size, params)
    raise ValueError(
        f"unknown strategy {name!r}; valid names: {', '.join(strat.STRATEGY_NAMES)}"
    )


def _train_round(
    X_l: np.ndarray,
    labels: np.ndarray,
    params: Optional[SvmParams],
    tune: bool,
    cv_seed: int,
    train_seed: int,
) -> tuple[svm.SvmModel, SvmParams]:
    y = _as_signed(labels)
    if tune or params is None:
        params = svm.cross_validate(X_l, y, params or SvmParams(), seed=cv_seed)
    model = svm.train(X_l, y, params.C, seed=train_seed)
    return model, params


def run_simulation(
    corpus: Corpus,
    matrix: EmbeddingMatrix,
    strategy: str,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    budget: int = DEFAULT_BUDGET,
    seeds_per_class: int = DEFAULT_SEEDS_PER_CLASS,
    cv_cadence: int = DEFAULT_CV_CADENCE,
    representation: str = "",
) -> LearningCurve:
    """One simulated-oracle run of the pool-based loop.

    Evaluation happens right after training, before the next acquisition, so
    the point at |L| = n scores the classifier trained on those n labels.
    With defaults this yields points at |L| = 10, 20, ..., budget.
    """
    if strategy not in strat.STRATEGY_NAMES:
        raise ValueError(
            f"unknown strategy {strategy!r}; valid names: {', '.join(strat.STRATEGY_NAMES)}"
        )
    matrix.check_alignment(corpus)
    truth = corpus.true_labels()
    if budget < 2 * seeds_per_class:
        raise ValueError(f"budget {budget} below the initial seed size {2 * seeds_per_class}")

    master = np.random.default_rng(seed)
    pool_seed = int(master.integers(0, 2**31 - 1))
    pool = seed_pool(corpus, pool_seed, per_class=seeds_per_class)

    X = np.asarray(matrix.values, dtype=np.float64)
    egal = strat.egal_params(X) if strategy == "egal" else None
    curve = LearningCurve(
        representation=representation or matrix.model, strategy=strategy, seed=seed
    )

    params: Optional[SvmParams] = None
    round_index = 0
    while True:
        l_rows, labels = _labelled_rows(corpus, pool)
        model, params = _train_round(
            X[l_rows],
            labels,
            params,
            tune=round_index % cv_cadence == 0,
            cv_seed=int(master.integers(0, 2**31 - 1)),
            train_seed=int(master.integers(0, 2**31 - 1)),
        )
        u_rows, u_ids = _unlabelled_rows(corpus, pool)
        margins = svm.decision(model, X[u_rows]) if u_rows else np.zeros(0)
        predictions = {
            doc_id: int(margin >= 0) for doc_id, margin in zip(u_ids, margins)
        }
        pool.set_machine_labels(predictions)
        curve.append(pool.labelled_count, accuracy_plus(pool, predictions, truth, len(corpus)))

        if pool.labelled_count >= budget or not pool.unlabelled:
            break
        remaining = budget - pool.labelled_count
        batch = select_batch(
            strategy,
            corpus,
            X,
            pool,
            model,
            batch_size=min(batch_size, remaining),
            seed=int(master.integers(0, 2**31 - 1)),
            committee_c=params.C,
            egal_params=egal,
        )
        for doc_id in batch.doc_ids:
            pool.assign_human(doc_id, truth[doc_id])
        round_index += 1

    return curve


def fine_tune_with_rollback(
    provider: EmbeddingProvider,
    texts: list[str],
    labels: list[int],
    params: AtalParams,
) -> TrainingReport:
    """Run the provider's bounded fine-tune and sanity-check its report.

    The provider keeps whichever state (initial or post-epoch) maximizes
    train accuracy, breaking ties by lower loss and then earlier epoch; a
    diverged run rolls back to the initial state and is flagged.
    """
    if len(texts) < 2 or len(set(labels)) < 2:
        raise ValueError("fine-tuning needs at least 2 labelled texts covering both classes")
    report = provider.fine_tune(texts, labels, params)
    if report.epochs_run > params.epochs:
        raise ValueError(
            f"provider ran {report.epochs_run} epochs, configured maximum is {params.epochs}"
        )
    if not 0 <= report.best_epoch <= report.epochs_run:
        raise ValueError(f"best_epoch {report.best_epoch} out of range")
    return report


def run_atal(
    corpus: Corpus,
    provider: EmbeddingProvider,
    strategy: str,
    seed: int,
    atal: AtalParams = AtalParams(),
    batch_size: int = DEFAULT_BATCH_SIZE,
    budget: int = DEFAULT_BUDGET,
    seeds_per_class: int = DEFAULT_SEEDS_PER_CLASS,
    cv_cadence: int = DEFAULT_CV_CADENCE,
    representation: str = "",
    mode: str = "avg",
) -> LearningCurve:
    """Adaptive tuning run: like :func:`run_simulation`, but every
    ``atal.cadence_rounds`` rounds (after the first) the provider is
    fine-tuned on the labels gathered so far and the whole corpus is
    re-embedded before training continues.

    The provider is reset at run start so repetitions are independent.
    """
    if not provider.can_fine_tune:
        raise ValueError("provider does not support fine-tuning")
    if strategy not in strat.STRATEGY_NAMES:
        raise ValueError(
            f"unknown strategy {strategy!r}; valid names: {', '.join(strat.STRATEGY_NAMES)}"
        )
    truth = corpus.true_labels()
    texts = corpus.texts

    provider.reset()
    master = np.random.default_rng(seed)
    pool_seed = int(master.integers(0, 2**31 - 1))
    pool = seed_pool(corpus, pool_seed, per_class=seeds_per_class)

    X = np.asarray(provider.embed(texts, mode), dtype=np.float64)
    curve = LearningCurve(
        representation=representation or f"atal-{mode}", strategy=strategy, seed=seed
    )

    params: Optional[SvmParams] = None
    egal = strat.egal_params(X) if strategy == "egal" else None
    round_index = 0
    while True:
        if round_index > 0 and round_index % atal.cadence_rounds == 0:
            l_rows, labels = _labelled_rows(corpus, pool)
            l_texts = [texts[i] for i in l_rows]
            try:
                fine_tune_with_rollback(provider, l_texts, [int(v) for v in labels], atal)
            except Exception as exc:  # noqa: BLE001 - propagate with partial curve
                raise FineTuneError(f"fine-tune failed at round {round_index}: {exc}", curve)
            X = np.asarray(provider.embed(texts, mode), dtype=np.float64)
            egal = strat.egal_params(X) if strategy == "egal" else None

        l_rows, labels = _labelled_rows(corpus, pool)
        model, params = _train_round(
            X[l_rows],
            labels,
            params,
            tune=round_index % cv_cadence == 0,
            cv_seed=int(master.integers(0, 2**31 - 1)),
            train_seed=int(master.integers(0, 2**31 - 1)),
        )
        u_rows, u_ids = _unlabelled_rows(corpus, pool)
        margins = svm.decision(model, X[u_rows]) if u_rows else np.zeros(0)
        predictions = {
            doc_id: int(margin >= 0) for doc_id, margin in zip(u_ids, margins)
        }
        pool.set_machine_labels(predictions)
        curve.append(pool.labelled_count, accuracy_plus(pool, predictions, truth, len(corpus)))

        if pool.labelled_count >= budget or not pool.unlabelled:
            break
        remaining = budget - pool.labelled_count
        batch = select_batch(
            strategy,
            corpus,
            X,
            pool,
            model,
            batch_size=min(batch_size, remaining),
            seed=int(master.integers(0, 2**31 - 1)),
            committee_c=params.C,
            egal_params=egal,
        )
        for doc_id in batch.doc_ids:
            pool.assign_human(doc_id, truth[doc_id])
        round_index += 1

    return curve


def build_representation(
    spec: RepresentationSpec, corpus: Corpus
) -> EmbeddingMatrix:
    """Materialize a document matrix for a non-provider representation."""
    if spec.kind == "tfidf":
        vocab, streams = preprocess(corpus, load_stopwords())
        return tfidf(corpus, vocab, streams)
    if spec.kind == "lda":
        from .lda import lda_fit  # deferred: numba compilation is slow to import

        vocab, streams = preprocess(corpus, load_stopwords())
        _, matrix = lda_fit(
            corpus, vocab, streams, K=spec.topics, iterations=spec.iterations, seed=spec.seed
        )
        return matrix
    if spec.kind == "wordvec":
        if not spec.path:
            raise ValueError("representation.path must point to a word-vector lexicon")
        return avg_word_vectors(corpus, load_word_vectors(spec.path))
    if spec.kind == "alem":
        if not spec.path:
            raise ValueError("representation.path must point to an ALEM file")
        return load_embeddings(spec.path, corpus)
    raise ValueError(f"cannot build representation of kind {spec.kind!r}")


def format_metric(value: float) -> str:
    return f"{value:.6f}"


def write_curves_csv(path: Path, curves: list[LearningCurve]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVES_HEADER)
        for curve in curves:
            for round_index, point in enumerate(curve.points):
                writer.writerow(
                    (
                        curve.seed,
                        round_index,
                        point.labels_used,
                        format_metric(point.accuracy_plus),
                    )
                )


def write_summary_csv(
    path: Path, summary: dict[tuple[str, str], tuple[float, float, int]]
) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for (rep, strategy), (mean, std, runs) in sorted(summary.items()):
            writer.writerow((rep, strategy, format_metric(mean), format_metric(std), runs))


def run_experiment(
    config: RunConfig,
    out_dir: Optional[Path] = None,
    provider: Optional[EmbeddingProvider] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> ExperimentResult:
    """Run the loop once per seed and aggregate AULC statistics.

    Per-run failures are recorded and the summary covers completed runs. When
    ``out_dir`` is given, curves.csv, summary.csv, and a run manifest are
    written there.
    """
    corpus = load_corpus(config.corpus_path)
    rep = config.representation

    if config.atal is not None:
        if provider is None and rep.kind == "provider":
            from .providers import HttpEmbeddingProvider

            provider = HttpEmbeddingProvider(rep.url, mode=rep.mode)
        if provider is None:
            raise ValueError("adaptive tuning requires a fine-tunable provider")
    matrix = None
    if config.atal is None:
        if provider is not None or rep.kind == "provider":
            if provider is None:
                from .providers import HttpEmbeddingProvider

                provider = HttpEmbeddingProvider(rep.url, mode=rep.mode)
            values = np.asarray(provider.embed(corpus.texts, rep.mode), dtype=np.float64)
            matrix = EmbeddingMatrix(
                values=values, ids=tuple(corpus.ids), model=rep.name, mode=rep.mode
            )
        else:
            matrix = build_representation(rep, corpus)

    curves: list[LearningCurve] = []
    failures: list[tuple[int, str]] = []
    for seed in config.seeds:
        if progress:
            progress(f"seed {seed}")
        try:
            if config.atal is not None:
                curve = run_atal(
                    corpus,
                    provider,
                    config.strategy,
                    seed,
                    atal=config.atal,
                    batch_size=config.batch_size,
                    budget=config.budget,
                    seeds_per_class=config.seeds_per_class,
                    cv_cadence=config.cv_cadence,
                    representation=rep.name,
                    mode=rep.mode,
                )
            else:
                curve = run_simulation(
                    corpus,
                    matrix,
                    config.strategy,
                    seed,
                    batch_size=config.batch_size,
                    budget=config.budget,
                    seeds_per_class=config.seeds_per_class,
                    cv_cadence=config.cv_cadence,
                    representation=rep.name,
                )
            curves.append(curve)
        except Exception as exc:  # noqa: BLE001 - per-run isolation
            failures.append((seed, str(exc)))

    summary = summarize(curves) if curves else {}
    result = ExperimentResult(curves=curves, failures=failures, summary=summary)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        result.curves_path = out_dir / "curves.csv"
        result.summary_path = out_dir / "summary.csv"
        result.manifest_path = out_dir / "run_manifest.json"
        write_curves_csv(result.curves_path, curves)
        write_summary_csv(result.summary_path, summary)
        manifest = {
            "name": config.name,
            "corpus": str(config.corpus_path),
            "representation": rep.name,
            "strategy": config.strategy,
            "batch_size": config.batch_size,
            "budget": config.budget,
            "cv_cadence": config.cv_cadence,
            "seeds": list(config.seeds),
            "atal": config.atal is not None,
            "completed_runs": [c.seed for c in curves],
            "failed_runs": [{"seed": s, "error": msg} for s, msg in failures],
            "aulc": {
                f"{rep_name}/{strategy_name}": {
                    "mean": round(mean, 6),
                    "std": round(std, 6),
                    "runs": n,
                }
                for (rep_name, strategy_name), (mean, std, n) in sorted(summary.items())
            },
        }
        result.manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return result
