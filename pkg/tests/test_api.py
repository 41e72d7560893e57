"""Session HTTP API: state machine, atomicity, and export completeness."""

import json

import pytest
from fastapi.testclient import TestClient

from altext.server import create_app

from synthetic import gaussian_corpus


@pytest.fixture(scope="module")
def client():
    corpus, matrix = gaussian_corpus(n_per_class=25, dims=3, separation=3.0, seed=1)
    app = create_app(corpus, matrix)
    with TestClient(app) as client:
        yield client


def create_session(client, **overrides):
    payload = {"strategy": "uncertainty", "budget": 20, "seed": 3}
    payload.update(overrides)
    resp = client.post("/sessions", json=payload)
    assert resp.status_code == 200
    return resp.json()


def post_batch(client, session_id, label=1):
    batch = client.get(f"/sessions/{session_id}/batch").json()
    labels = {doc_id: label for doc_id in batch["doc_ids"]}
    return client.post(f"/sessions/{session_id}/labels", json={"labels": labels})


def post_batch_alternating(client, session_id):
    batch = client.get(f"/sessions/{session_id}/batch").json()
    labels = {doc_id: i % 2 for i, doc_id in enumerate(batch["doc_ids"])}
    return client.post(f"/sessions/{session_id}/labels", json={"labels": labels})


class TestSessionLifecycle:
    def test_create_starts_in_seeding_with_ten_pending(self, client):
        session = create_session(client)
        assert session["phase"] == "SEEDING"
        assert session["pending_count"] == 10
        batch = client.get(f"/sessions/{session['session_id']}/batch").json()
        assert len(batch["doc_ids"]) == 10
        assert len(batch["texts"]) == 10
        assert batch["phase"] == "SEEDING"

    def test_posting_seed_labels_activates_session(self, client):
        session = create_session(client, budget=40)
        resp = post_batch_alternating(client, session["session_id"])
        assert resp.status_code == 200
        status = resp.json()
        assert status["phase"] == "ACTIVE"
        assert status["labelled"] == 10
        assert status["pending_count"] == 10

    def test_budget_exhaustion_enters_export_only(self, client):
        session = create_session(client, budget=20)
        sid = session["session_id"]
        assert post_batch_alternating(client, sid).status_code == 200
        final = post_batch_alternating(client, sid)
        assert final.status_code == 200
        assert final.json()["phase"] == "EXPORT-ONLY"
        assert client.get(f"/sessions/{sid}/batch").status_code == 409
        resp = client.post(f"/sessions/{sid}/labels", json={"labels": {"any": 1}})
        assert resp.status_code == 409

    def test_export_covers_every_corpus_id_once(self, client):
        session = create_session(client, budget=20)
        sid = session["session_id"]
        post_batch_alternating(client, sid)
        post_batch_alternating(client, sid)
        resp = client.get(f"/sessions/{sid}/export")
        assert resp.status_code == 200
        rows = [json.loads(line) for line in resp.text.strip().splitlines()]
        assert len(rows) == 50
        assert len({r["id"] for r in rows}) == 50
        sources = {r["source"] for r in rows}
        assert sources == {"human", "machine"}
        assert sum(r["source"] == "human" for r in rows) == 20
        for row in rows:
            assert row["label"] in (0, 1)
            if row["source"] == "machine":
                assert isinstance(row["margin"], float)

    def test_export_is_pure_snapshot(self, client):
        session = create_session(client, budget=20)
        sid = session["session_id"]
        post_batch_alternating(client, sid)
        first = client.get(f"/sessions/{sid}/export").text
        second = client.get(f"/sessions/{sid}/export").text
        assert first == second


class TestValidation:
    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/nope/status").status_code == 404
        assert client.get("/sessions/nope/batch").status_code == 404
        assert client.post("/sessions/nope/labels", json={"labels": {}}).status_code == 404

    def test_label_for_non_pending_id_is_409_and_atomic(self, client):
        session = create_session(client)
        sid = session["session_id"]
        batch = client.get(f"/sessions/{sid}/batch").json()
        labels = {doc_id: 1 for doc_id in batch["doc_ids"][:-1]}
        labels["not-a-doc"] = 0
        resp = client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        assert resp.status_code == 409
        status = client.get(f"/sessions/{sid}/status").json()
        assert status["phase"] == "SEEDING" and status["labelled"] == 0

    def test_incomplete_batch_is_409(self, client):
        session = create_session(client)
        sid = session["session_id"]
        batch = client.get(f"/sessions/{sid}/batch").json()
        labels = {doc_id: 1 for doc_id in batch["doc_ids"][:4]}
        resp = client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        assert resp.status_code == 409

    def test_malformed_label_is_422(self, client):
        session = create_session(client)
        sid = session["session_id"]
        batch = client.get(f"/sessions/{sid}/batch").json()
        labels = {doc_id: 1 for doc_id in batch["doc_ids"]}
        labels[batch["doc_ids"][0]] = 5
        resp = client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        assert resp.status_code == 422

    def test_export_before_first_training_is_409(self, client):
        session = create_session(client)
        resp = client.get(f"/sessions/{session['session_id']}/export")
        assert resp.status_code == 409

    def test_unknown_strategy_rejected_at_creation(self, client):
        resp = client.post("/sessions", json={"strategy": "bogus"})
        assert resp.status_code == 422
        assert "uncertainty" in resp.json()["detail"]


class TestStatus:
    def test_status_reports_confidence_histogram(self, client):
        session = create_session(client, budget=40)
        sid = session["session_id"]
        post_batch_alternating(client, sid)
        status = client.get(f"/sessions/{sid}/status").json()
        hist = status["confidence_histogram"]
        assert len(hist["bin_edges"]) == len(hist["counts"]) + 1
        assert sum(hist["counts"]) == status["corpus_size"] - status["labelled"]
        assert status["rounds"][-1]["labelled"] == 10

    def test_concurrent_sessions_are_independent(self, client):
        a = create_session(client, budget=40, seed=1)
        b = create_session(client, budget=40, seed=2)
        post_batch_alternating(client, a["session_id"])
        status_a = client.get(f"/sessions/{a['session_id']}/status").json()
        status_b = client.get(f"/sessions/{b['session_id']}/status").json()
        assert status_a["labelled"] == 10
        assert status_b["labelled"] == 0
