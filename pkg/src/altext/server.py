"""HTTP session API for live annotation.

Serves one corpus (with a precomputed embedding matrix) and any number of
concurrent in-memory sessions. Endpoints: POST /sessions, then per-session
GET /batch, POST /labels, GET /status, GET /export. Labels are applied
atomically per batch; sessions move SEEDING -> ACTIVE -> EXPORT-ONLY.
"""

from __future__ import annotations

import json
import uuid
from typing import Annotated, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .corpus import Corpus, EmbeddingMatrix
from .session import (
    IncompleteBatchError,
    LiveSession,
    Phase,
    PhaseError,
    UnknownDocumentError,
)

Label = Annotated[int, Field(ge=0, le=1)]


class CreateSessionRequest(BaseModel):
    strategy: str = "uncertainty"
    batch_size: int = Field(default=10, ge=1)
    budget: int = Field(default=1000, ge=2)
    seed: int = 0


class SessionSummary(BaseModel):
    session_id: str
    phase: str
    strategy: str
    budget: int
    pending_count: int


class BatchResponse(BaseModel):
    session_id: str
    phase: str
    doc_ids: list[str]
    texts: list[str]


class PostLabelsRequest(BaseModel):
    labels: dict[str, Label]


class RoundInfo(BaseModel):
    round: int
    labelled: int
    tuned: bool
    C: float


class HistogramModel(BaseModel):
    bin_edges: list[float]
    counts: list[int]


class StatusResponse(BaseModel):
    session_id: str
    phase: str
    labelled: int
    budget: int
    corpus_size: int
    pending_count: int
    strategy: str
    confidence_histogram: HistogramModel
    rounds: list[RoundInfo]


def create_app(
    corpus: Corpus,
    matrix: EmbeddingMatrix,
    cv_cadence: int = 10,
    snapshot_path: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="altext session API")
    # the annotation console is served as static files from anywhere local
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    app.state.corpus = corpus
    app.state.matrix = matrix
    app.state.sessions: dict[str, LiveSession] = {}

    def get_session(session_id: str) -> LiveSession:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/sessions", response_model=SessionSummary)
    def create_session(req: CreateSessionRequest) -> SessionSummary:
        session_id = uuid.uuid4().hex
        try:
            session = LiveSession(
                session_id=session_id,
                corpus=app.state.corpus,
                matrix=app.state.matrix,
                strategy=req.strategy,
                batch_size=req.batch_size,
                budget=req.budget,
                cv_cadence=cv_cadence,
                seed=req.seed,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        app.state.sessions[session_id] = session
        return SessionSummary(
            session_id=session_id,
            phase=session.phase.value,
            strategy=session.strategy,
            budget=session.budget,
            pending_count=len(session.pending.doc_ids),
        )

    @app.get("/sessions/{session_id}/batch", response_model=BatchResponse)
    def get_batch(session_id: str) -> BatchResponse:
        session = get_session(session_id)
        if session.phase == Phase.EXPORT_ONLY or session.pending is None:
            raise HTTPException(status_code=409, detail="session is export-only")
        docs = session.pending_documents()
        return BatchResponse(
            session_id=session_id,
            phase=session.phase.value,
            doc_ids=[d[0] for d in docs],
            texts=[d[1] for d in docs],
        )

    @app.post("/sessions/{session_id}/labels", response_model=StatusResponse)
    def post_labels(session_id: str, req: PostLabelsRequest) -> StatusResponse:
        session = get_session(session_id)
        try:
            session.post_labels(dict(req.labels))
        except (UnknownDocumentError, IncompleteBatchError, PhaseError) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return StatusResponse(**session.status())

    @app.get("/sessions/{session_id}/status", response_model=StatusResponse)
    def get_status(session_id: str) -> StatusResponse:
        return StatusResponse(**get_session(session_id).status())

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str) -> PlainTextResponse:
        session = get_session(session_id)
        try:
            rows = session.export()
        except PhaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        body = "\n".join(json.dumps(row) for row in rows) + "\n"
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if snapshot_path:

        @app.on_event("shutdown")
        def snapshot() -> None:
            payload = {
                sid: session.status() for sid, session in app.state.sessions.items()
            }
            with open(snapshot_path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2)

    return app
