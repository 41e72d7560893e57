"""Acceptance suite: one test per release criterion, one PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s``. The two corpus spot
checks need user-supplied data (see README: data/mr.jsonl and
data/mr_transformer_avg.alem); they skip with an explicit reason when the
files are absent, since dataset acquisition is out of scope.
"""

import math
import os
from pathlib import Path

import numpy as np
import pytest

from altext import svm
from altext.corpus import LabelPool, load_corpus, load_embeddings, save_embeddings, write_corpus
from altext.engine import RepresentationSpec, RunConfig, run_experiment, run_simulation
from altext.features import load_stopwords, preprocess, tfidf
from altext.metrics import LearningCurve, accuracy_plus, aulc
from altext.strategies import egal_params, select_egal, select_id, select_qbc, select_uncertainty

from synthetic import gaussian_corpus
from test_svm import qp_oracle

MR_CORPUS = Path(os.environ.get("ALTEXT_MR_CORPUS", Path(__file__).parents[1] / "data" / "mr.jsonl"))
MR_TRANSFORMER_ALEM = Path(
    os.environ.get(
        "ALTEXT_MR_TRANSFORMER_ALEM",
        Path(__file__).parents[1] / "data" / "mr_transformer_avg.alem",
    )
)


def report(name: str) -> None:
    print(f"\nACCEPTANCE {name}: PASS")


def cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


class TestMetricOracles:
    def test_metric_oracles(self):
        # accuracy: hand-counted worked examples at 1e-12
        human = [f"h{i}" for i in range(10)]
        machine = [f"m{i}" for i in range(90)]
        pool = LabelPool(labelled={h: 1 for h in human}, unlabelled=set(machine))
        truth = {i: 1 for i in human + machine}
        preds = {m: (1 if k < 72 else 0) for k, m in enumerate(machine)}
        assert abs(accuracy_plus(pool, preds, truth, 100) - 0.82) < 1e-12

        truth_5050 = {h: 1 for h in human[:5]} | {h: 0 for h in human[5:]}
        truth_5050 |= {m: (1 if k < 45 else 0) for k, m in enumerate(machine)}
        assert (
            abs(accuracy_plus(pool, {m: 1 for m in machine}, truth_5050, 100) - 0.55)
            < 1e-12
        )

        all_human = LabelPool(labelled={h: 1 for h in human}, unlabelled=set())
        assert accuracy_plus(all_human, {}, {h: 1 for h in human}, 10) == 1.0

        # area under the curve: hand trapezoids at 1e-12
        c = LearningCurve()
        c.append(10, 0.5)
        c.append(1000, 1.0)
        assert abs(aulc(c) - 0.75) < 1e-12

        c = LearningCurve()
        for x, y in ((10, 0.4), (20, 0.8), (30, 0.8)):
            c.append(x, y)
        assert abs(aulc(c) - 0.70) < 1e-12

        flat = LearningCurve()
        for x in (10, 300, 1000):
            flat.append(x, 1.0)
        assert aulc(flat) == 1.0
        report("metric-oracles")


class TestSvmOracleEquivalence:
    def test_svm_oracle_equivalence(self):
        rng = np.random.default_rng(2024)
        for trial in range(25):
            n = int(rng.integers(4, 21))
            dims = int(rng.integers(1, 6))
            X = rng.normal(size=(n, dims))
            y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
            if np.unique(y).size < 2:
                y[0] = -y[0]
            C = float(rng.choice([0.1, 1.0, 10.0]))
            oracle_obj, _ = qp_oracle(X, y, C)
            model = svm.train(X, y, C, seed=trial, tol=1e-8, track_objective=True)
            assert abs(model.objective_history[-1] - oracle_obj) < 1e-6

        # KKT feasibility on separable instances at large C
        for trial in range(10):
            n = int(rng.integers(4, 21))
            X = rng.normal(size=(n, 3))
            y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
            if np.unique(y).size < 2:
                y[0] = -y[0]
            X[:, 0] = (np.abs(X[:, 0]) + 0.5) * y
            model = svm.train(X, y, C=100.0, seed=trial, tol=1e-8)
            margins = svm.decision(model, X)
            assert np.all(y * margins >= 1 - 1e-6)
        report("svm-oracle-equivalence")


class TestStrategyOracles:
    def test_strategy_oracles(self):
        rng = np.random.default_rng(77)
        for trial in range(20):
            n = int(rng.integers(30, 51))
            X = rng.normal(size=(n, 4))
            labels = (rng.random(n) < 0.5).astype(int)
            labels[:2] = [0, 1]
            l_rows = list(range(8))
            u_rows = list(range(8, n))
            u_ids = [f"u{i}" for i in u_rows]
            X_u = X[u_rows]
            y_l = np.where(labels[:8] == 1, 1.0, -1.0)
            model = svm.train(X[l_rows], y_l, 1.0, seed=trial)
            margins = X_u @ model.weights + model.bias
            k = 10

            # uncertainty: ascending |margin| with corpus-order ties
            got = select_uncertainty(model, u_ids, X_u, k).doc_ids
            order = sorted(range(len(u_rows)), key=lambda i: (abs(margins[i]), i))
            assert list(got) == [u_ids[i] for i in order[:k]]

            # information density: entropy x mean cosine
            got = select_id(model, u_ids, X_u, k).doc_ids
            scores = []
            for i in range(len(u_rows)):
                p = 1.0 / (1.0 + math.exp(-margins[i]))
                h = 0.0
                for q in (p, 1.0 - p):
                    if q > 0:
                        h -= q * math.log(q)
                dens = sum(cosine(X_u[i], X_u[j]) for j in range(len(u_rows)))
                scores.append(h * max(dens / len(u_rows), 0.0))
            order = sorted(range(len(u_rows)), key=lambda i: (-scores[i], i))
            assert list(got) == [u_ids[i] for i in order[:k]]

            # EGAL: thresholded density among candidates far from L
            params = egal_params(X)
            got = select_egal(X, l_rows, u_rows, u_ids, k, params).doc_ids
            density = {
                i: sum(cosine(X[i], X[s]) for s in range(n) if cosine(X[i], X[s]) >= params.alpha)
                for i in u_rows
            }
            diversity = {i: max(cosine(X[i], X[l]) for l in l_rows) for i in u_rows}
            beta = params.beta
            cs = [i for i in u_rows if diversity[i] <= beta]
            if len(cs) < k:
                beta = float(np.quantile([diversity[i] for i in u_rows], params.w))
                cs = [i for i in u_rows if diversity[i] <= beta]
            if len(cs) < k:
                beta = max(diversity.values())
                cs = [i for i in u_rows if diversity[i] <= beta]
            order = sorted(cs, key=lambda i: (-density[i], i))
            assert list(got) == [f"u{i}" for i in order[:k]]

            # QBC: reconstruct the committee and its vote-entropy ranking
            seed = 1000 + trial
            got = select_qbc(X[l_rows], labels[:8], u_ids, X_u, k, seed=seed, C=1.0).doc_ids
            committee_rng = np.random.default_rng(seed)
            votes = np.zeros((5, len(u_rows)))
            absm = np.zeros((5, len(u_rows)))
            for member in range(5):
                for _ in range(10):
                    cand = committee_rng.integers(0, 8, size=8)
                    if np.unique(y_l[cand]).size == 2:
                        break
                member_seed = int(committee_rng.integers(0, 2**31 - 1))
                m = svm.train(X[l_rows][cand], y_l[cand], 1.0, seed=member_seed)
                mm = X_u @ m.weights + m.bias
                votes[member] = (mm >= 0).astype(int)
                absm[member] = np.abs(mm)
            ent = np.zeros(len(u_rows))
            for i in range(len(u_rows)):
                for frac in (votes[:, i].mean(), 1 - votes[:, i].mean()):
                    if frac > 0:
                        ent[i] -= frac * math.log(frac)
            mean_abs = absm.mean(axis=0)
            order = sorted(range(len(u_rows)), key=lambda i: (-ent[i], mean_abs[i], i))
            assert list(got) == [u_ids[i] for i in order[:k]]
        report("strategy-oracles")


class TestActiveLearningBenefit:
    def test_uncertainty_beats_random_on_gaussians(self):
        corpus, matrix = gaussian_corpus(n_per_class=1000, dims=20, separation=3.0, seed=99)
        aulcs = {"uncertainty": [], "random": []}
        for strategy in aulcs:
            for seed in range(10):
                curve = run_simulation(corpus, matrix, strategy, seed=seed, budget=500)
                aulcs[strategy].append(aulc(curve))
        mean_unc = float(np.mean(aulcs["uncertainty"]))
        mean_rand = float(np.mean(aulcs["random"]))
        print(f"\n  uncertainty {mean_unc:.4f} vs random {mean_rand:.4f}")
        assert mean_unc > mean_rand
        report("active-learning-benefit")


class TestDeterminism:
    def test_identical_config_gives_byte_identical_csv(self, tmp_path):
        corpus, matrix = gaussian_corpus(n_per_class=200, dims=8, separation=2.5, seed=3)
        corpus_path = tmp_path / "corpus.jsonl"
        write_corpus(corpus_path, corpus.documents)
        alem_path = tmp_path / "emb.alem"
        save_embeddings(alem_path, matrix)
        config = RunConfig(
            corpus_path=str(corpus_path),
            representation=RepresentationSpec(kind="alem", path=str(alem_path)),
            strategy="uncertainty",
            budget=200,
            seeds=(0, 1, 2),
        )
        blobs = []
        for name in ("first", "second"):
            out = tmp_path / name
            run_experiment(config, out_dir=out)
            blobs.append((out / "curves.csv").read_bytes())
        assert blobs[0] == blobs[1]
        report("determinism")


@pytest.mark.skipif(
    not MR_CORPUS.exists(),
    reason=f"MR corpus not supplied at {MR_CORPUS} (dataset acquisition is out of scope; "
    "set ALTEXT_MR_CORPUS to an MR JSONL file to enable)",
)
class TestPaperNumberSpotCheck:
    def test_mr_tfidf_uncertainty_matches_reported_aulc(self):
        corpus = load_corpus(MR_CORPUS)
        positives = sum(d.true_label == 1 for d in corpus)
        negatives = sum(d.true_label == 0 for d in corpus)
        assert positives == 1000 and negatives == 1000

        vocab, streams = preprocess(corpus, load_stopwords())
        assert abs(len(vocab) - 6181) <= 0.1 * 6181  # within 10 percent
        matrix = tfidf(corpus, vocab, streams)
        values = []
        for seed in range(10):
            curve = run_simulation(corpus, matrix, "uncertainty", seed=seed, budget=1000)
            values.append(aulc(curve))
        mean = float(np.mean(values))
        print(f"\n  MR tfidf/uncertainty mean AULC {mean:.4f} (target 0.871 +/- 0.03)")
        assert abs(mean - 0.871) <= 0.03
        report("paper-number-spot-check")


@pytest.mark.skipif(
    not (MR_CORPUS.exists() and MR_TRANSFORMER_ALEM.exists()),
    reason="MR corpus and/or transformer-avg ALEM fixture not supplied "
    f"(expected {MR_CORPUS} and {MR_TRANSFORMER_ALEM}); produce the fixture once "
    "with the embedding sidecar's export tool",
)
class TestRepresentationOrdering:
    def test_transformer_avg_beats_lda_on_mr(self):
        from altext.lda import lda_fit

        corpus = load_corpus(MR_CORPUS)
        transformer = load_embeddings(MR_TRANSFORMER_ALEM, corpus)
        assert transformer.dims == 768
        vocab, streams = preprocess(corpus, load_stopwords())
        # 300 sweeps keeps the check under its time budget; the reported gap
        # (0.95 vs 0.79) dwarfs any residual mixing noise
        _, lda_matrix = lda_fit(corpus, vocab, streams, K=300, iterations=300, seed=0)

        scores = {}
        for name, matrix in (("transformer-avg", transformer), ("lda", lda_matrix)):
            values = [
                aulc(run_simulation(corpus, matrix, "uncertainty", seed=seed, budget=1000))
                for seed in range(10)
            ]
            scores[name] = float(np.mean(values))
        print(f"\n  transformer-avg {scores['transformer-avg']:.4f} vs lda {scores['lda']:.4f}")
        assert scores["transformer-avg"] > scores["lda"]
        report("representation-ordering")
