"""HTTP wire protocol for the embedding provider.

POST /embed    {texts, model, mode} -> {dims, vectors: base64 f32-LE row-major}
POST /finetune {texts, labels, hyperparams} -> training report
POST /reset    -> {}
GET  /info     -> {model, dims, can_fine_tune}

One model per process; embed and fine-tune are serialized inside the encoder.
"""

from __future__ import annotations

import base64
from typing import Annotated, Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .encoder import TransformerEncoder


class EmbedRequest(BaseModel):
    texts: list[str]
    model: str
    mode: Literal["avg", "cls"] = "avg"


class EmbedResponse(BaseModel):
    dims: int
    vectors: str  # base64 of float32 little-endian, row-major


class Hyperparams(BaseModel):
    epochs: int = Field(default=15, ge=1)
    learning_rate: float = Field(default=1e-5, gt=0)
    train_batch: int = Field(default=4, ge=1)
    adam_epsilon: float = Field(default=1e-8, gt=0)


class FineTuneRequest(BaseModel):
    texts: list[str]
    labels: list[Annotated[int, Field(ge=0, le=1)]]
    hyperparams: Hyperparams = Hyperparams()


class FineTuneResponse(BaseModel):
    epochs_run: int
    best_epoch: int
    initial_accuracy: float
    initial_loss: float
    train_accuracy: list[float]
    train_loss: list[float]
    diverged: bool


class InfoResponse(BaseModel):
    model: str
    dims: int
    can_fine_tune: bool


def create_app(encoder: TransformerEncoder) -> FastAPI:
    app = FastAPI(title="embedding sidecar")
    app.state.encoder = encoder

    @app.get("/info", response_model=InfoResponse)
    def info() -> InfoResponse:
        return InfoResponse(
            model=encoder.name, dims=encoder.dims, can_fine_tune=encoder.can_fine_tune
        )

    @app.post("/embed", response_model=EmbedResponse)
    def embed(req: EmbedRequest) -> EmbedResponse:
        if req.model != encoder.name:
            raise HTTPException(
                status_code=409,
                detail=f"this service hosts {encoder.name!r}, not {req.model!r}",
            )
        if not req.texts:
            return EmbedResponse(dims=encoder.dims, vectors="")
        matrix = encoder.embed(req.texts, mode=req.mode)
        payload = base64.b64encode(
            np.ascontiguousarray(matrix, dtype="<f4").tobytes(order="C")
        ).decode("ascii")
        return EmbedResponse(dims=encoder.dims, vectors=payload)

    @app.post("/finetune", response_model=FineTuneResponse)
    def finetune(req: FineTuneRequest) -> FineTuneResponse:
        if len(req.texts) != len(req.labels):
            raise HTTPException(status_code=422, detail="texts and labels differ in length")
        try:
            report = encoder.fine_tune(
                req.texts,
                req.labels,
                epochs=req.hyperparams.epochs,
                learning_rate=req.hyperparams.learning_rate,
                train_batch=req.hyperparams.train_batch,
                adam_epsilon=req.hyperparams.adam_epsilon,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return FineTuneResponse(**report.to_dict())

    @app.post("/reset")
    def reset() -> dict:
        encoder.reset()
        return {}

    return app
