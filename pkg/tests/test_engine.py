"""Active-learning loop orchestration, adaptive tuning, and the runner."""

import numpy as np
import pytest

from altext import svm
from altext.corpus import Corpus, Document, EmbeddingMatrix
from altext.engine import (
    FineTuneError,
    fine_tune_with_rollback,
    run_atal,
    run_simulation,
    write_curves_csv,
)
from altext.providers import AtalParams, TrainingReport, pick_rollback_state

from synthetic import gaussian_corpus


def coord_corpus(n_per_class: int, seed: int, separation: float = 4.0) -> Corpus:
    """Documents whose texts carry a point: informative coord a, noise coord b."""
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(2 * n_per_class):
        label = i % 2
        a = rng.normal(loc=separation / 2 if label else -separation / 2)
        b = rng.normal()
        docs.append(
            Document(id=f"d{i}", text=f"a {a:.9f} b {b:.9f}", true_label=label)
        )
    return Corpus(tuple(docs), name="coords")


def parse_coords(text: str) -> tuple[float, float]:
    parts = text.split()
    return float(parts[1]), float(parts[3])


def flat_report(n_epochs: int = 0) -> TrainingReport:
    return TrainingReport(
        epochs_run=n_epochs,
        best_epoch=0,
        initial_accuracy=1.0,
        initial_loss=0.0,
        train_accuracy=(1.0,) * n_epochs,
        train_loss=(0.0,) * n_epochs,
    )


class StaticCoordProvider:
    """Embeds the encoded point unchanged; fine-tune keeps the initial state."""

    dims = 2
    can_fine_tune = True

    def __init__(self):
        self.fine_tune_calls: list[int] = []

    def embed(self, texts, mode="avg"):
        return np.array([parse_coords(t) for t in texts], dtype=np.float64)

    def fine_tune(self, texts, labels, params):
        self.fine_tune_calls.append(len(texts))
        return flat_report()

    def reset(self):
        pass


class GainProvider(StaticCoordProvider):
    """Hides the informative coordinate until the first fine-tune reveals it."""

    def __init__(self):
        super().__init__()
        self.gain = 0.0

    def embed(self, texts, mode="avg"):
        pts = np.array([parse_coords(t) for t in texts], dtype=np.float64)
        return np.column_stack([pts[:, 1], self.gain * pts[:, 0]])

    def fine_tune(self, texts, labels, params):
        self.fine_tune_calls.append(len(texts))
        if len(set(labels)) == 2:
            self.gain = 1.0
        accs = tuple(min(0.5 + 0.1 * (e + 1), 1.0) for e in range(params.epochs))
        losses = tuple(1.0 / (e + 1) for e in range(params.epochs))
        best = pick_rollback_state((0.5,) + accs, (2.0,) + losses)
        return TrainingReport(
            epochs_run=params.epochs,
            best_epoch=best,
            initial_accuracy=0.5,
            initial_loss=2.0,
            train_accuracy=accs,
            train_loss=losses,
        )

    def reset(self):
        self.gain = 0.0


class FailingProvider(StaticCoordProvider):
    def fine_tune(self, texts, labels, params):
        raise RuntimeError("weights exploded")


class TestRunSimulation:
    def test_exhausted_pool_gives_two_points_ending_at_one(self):
        corpus, matrix = gaussian_corpus(n_per_class=10, dims=3, separation=3.0, seed=0)
        curve = run_simulation(corpus, matrix, "random", seed=1, budget=20)
        assert [p.labels_used for p in curve.points] == [10, 20]
        assert curve.points[-1].accuracy_plus == 1.0

    def test_default_shape_produces_points_every_batch(self):
        corpus, matrix = gaussian_corpus(n_per_class=600, dims=3, separation=3.0, seed=2)
        curve = run_simulation(corpus, matrix, "uncertainty", seed=0, budget=1000)
        xs = [p.labels_used for p in curve.points]
        assert xs == list(range(10, 1001, 10))
        assert len(xs) == 100

    def test_cross_validation_runs_exactly_on_cadence(self, monkeypatch):
        corpus, matrix = gaussian_corpus(n_per_class=150, dims=3, separation=3.0, seed=3)
        calls = []
        real_cv = svm.cross_validate

        def spy(X, y, params, seed=0):
            calls.append(X.shape[0])
            return real_cv(X, y, params, seed=seed)

        monkeypatch.setattr(svm, "cross_validate", spy)
        run_simulation(corpus, matrix, "random", seed=4, budget=250)
        # rounds 0, 10, 20 -> |L| = 10, 110, 210
        assert calls == [10, 110, 210]

    def test_byte_identical_curves_for_same_seed(self, tmp_path):
        corpus, matrix = gaussian_corpus(n_per_class=80, dims=4, separation=2.0, seed=5)
        runs = []
        for _ in range(2):
            curve = run_simulation(corpus, matrix, "uncertainty", seed=9, budget=100)
            path = tmp_path / f"c{len(runs)}.csv"
            write_curves_csv(path, [curve])
            runs.append(path.read_bytes())
        assert runs[0] == runs[1]

    def test_unknown_strategy_lists_valid_names(self):
        corpus, matrix = gaussian_corpus(n_per_class=10, dims=2, separation=2.0, seed=6)
        with pytest.raises(ValueError, match="random, uncertainty, qbc, id, egal"):
            run_simulation(corpus, matrix, "foo", seed=0)

    def test_every_strategy_completes_a_short_run(self):
        corpus, matrix = gaussian_corpus(n_per_class=40, dims=3, separation=3.0, seed=7)
        for strategy in ("random", "uncertainty", "qbc", "id", "egal"):
            curve = run_simulation(corpus, matrix, strategy, seed=1, budget=40)
            assert [p.labels_used for p in curve.points] == [10, 20, 30, 40]
            assert curve.strategy == strategy


class TestRollbackRule:
    def test_argmax_accuracy(self):
        # initial 0.5, epochs (0.6, 0.9, 0.8) -> epoch 2
        assert pick_rollback_state((0.5, 0.6, 0.9, 0.8), (1.0, 1.0, 1.0, 1.0)) == 2

    def test_tie_broken_by_lower_loss(self):
        assert pick_rollback_state((0.5, 0.9, 0.9), (1.0, 0.8, 0.3)) == 2

    def test_full_tie_keeps_earliest(self):
        assert pick_rollback_state((0.9, 0.9, 0.9), (0.5, 0.5, 0.5)) == 0

    def test_initial_state_retained_when_already_best(self):
        assert pick_rollback_state((1.0, 0.9, 0.95), (0.1, 0.2, 0.3)) == 0

    def test_initial_displaced_by_equal_accuracy_lower_loss(self):
        assert pick_rollback_state((1.0, 1.0), (0.5, 0.2)) == 1


class TestFineTuneWithRollback:
    def test_requires_both_classes(self):
        provider = StaticCoordProvider()
        with pytest.raises(ValueError, match="both classes"):
            fine_tune_with_rollback(provider, ["a 1 b 2", "a 2 b 1"], [1, 1], AtalParams())

    def test_rejects_overlong_reports(self):
        class Liar(StaticCoordProvider):
            def fine_tune(self, texts, labels, params):
                return flat_report(n_epochs=99)

        with pytest.raises(ValueError, match="99 epochs"):
            fine_tune_with_rollback(Liar(), ["a 1 b 2", "a 2 b 1"], [0, 1], AtalParams())


class TestRunAtal:
    def test_noop_provider_matches_plain_run(self):
        corpus = coord_corpus(n_per_class=60, seed=1)
        provider = StaticCoordProvider()
        matrix = EmbeddingMatrix(
            values=provider.embed(corpus.texts),
            ids=tuple(corpus.ids),
            model="static",
        )
        plain = run_simulation(corpus, matrix, "uncertainty", seed=3, budget=120)
        tuned = run_atal(
            corpus, provider, "uncertainty", seed=3, atal=AtalParams(cadence_rounds=5),
            budget=120,
        )
        assert [p.labels_used for p in tuned.points] == [
            p.labels_used for p in plain.points
        ]
        for a, b in zip(plain.points, tuned.points):
            assert abs(a.accuracy_plus - b.accuracy_plus) < 1e-9

    def test_exactly_four_fine_tune_events_at_default_cadence(self):
        corpus = coord_corpus(n_per_class=550, seed=2)
        provider = StaticCoordProvider()
        run_atal(corpus, provider, "random", seed=0, budget=1000)
        # events at rounds 20/40/60/80, i.e. with 210/410/610/810 labels held
        assert provider.fine_tune_calls == [210, 410, 610, 810]

    def test_provider_reset_called_per_run(self):
        corpus = coord_corpus(n_per_class=30, seed=3)
        provider = GainProvider()
        run_atal(
            corpus, provider, "uncertainty", seed=1,
            atal=AtalParams(cadence_rounds=2), budget=40,
        )
        assert provider.gain == 1.0
        run_atal(
            corpus, provider, "uncertainty", seed=2,
            atal=AtalParams(cadence_rounds=100), budget=40,
        )
        # second run never reaches a tuning round, so reset() must have cleared it
        assert provider.gain == 0.0

    def test_tuning_helps_on_separable_data_for_most_seeds(self):
        corpus = coord_corpus(n_per_class=150, seed=4)
        provider = GainProvider()
        static_matrix = EmbeddingMatrix(
            values=provider.embed(corpus.texts),  # gain 0: informative axis hidden
            ids=tuple(corpus.ids),
            model="static",
        )
        wins = 0
        for seed in range(10):
            plain = run_simulation(corpus, static_matrix, "uncertainty", seed=seed, budget=250)
            tuned = run_atal(
                corpus, provider, "uncertainty", seed=seed,
                atal=AtalParams(cadence_rounds=10), budget=250,
            )
            # compare at matched |L| after the first tuning event (round 10)
            plain_acc = {p.labels_used: p.accuracy_plus for p in plain.points}
            tuned_acc = {p.labels_used: p.accuracy_plus for p in tuned.points}
            matched = [x for x in plain_acc if x >= 120]
            if all(tuned_acc[x] >= plain_acc[x] for x in matched):
                wins += 1
        assert wins >= 7

    def test_hard_fine_tune_failure_preserves_partial_curve(self):
        corpus = coord_corpus(n_per_class=40, seed=5)
        provider = FailingProvider()
        with pytest.raises(FineTuneError) as err:
            run_atal(
                corpus, provider, "random", seed=0,
                atal=AtalParams(cadence_rounds=3), budget=80,
            )
        partial = err.value.partial_curve
        assert [p.labels_used for p in partial.points] == [10, 20, 30]

    def test_default_hyperparameters(self):
        params = AtalParams()
        assert params.cadence_rounds == 20
        assert params.epochs == 15
        assert params.learning_rate == 1e-5
        assert params.train_batch == 4
        assert params.adam_epsilon == 1e-8
