"""Embedding provider abstraction and the HTTP client for a remote encoder.

A provider turns raw texts into dense vectors and, when it supports it, can
be fine-tuned on the labels gathered so far and later reset to its pristine
pretrained state. The wire protocol mirrors the sidecar service: JSON
requests, float32 little-endian row-major matrices transported as base64.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import httpx
import numpy as np


@dataclass(frozen=True)
class AtalParams:
    """Fine-tuning schedule and optimizer settings for adaptive tuning."""

    cadence_rounds: int = 20
    epochs: int = 15
    learning_rate: float = 1e-5
    train_batch: int = 4
    adam_epsilon: float = 1e-8


@dataclass(frozen=True)
class TrainingReport:
    """Per-epoch fine-tuning record; index 0 of the candidate states is the
    untouched pre-tuning model, epoch i maps to candidate index i."""

    epochs_run: int
    best_epoch: int  # 0 = initial state retained
    initial_accuracy: float
    initial_loss: float
    train_accuracy: tuple[float, ...] = field(default=())
    train_loss: tuple[float, ...] = field(default=())
    diverged: bool = False


def pick_rollback_state(accuracies: Sequence[float], losses: Sequence[float]) -> int:
    """Index of the state to keep: maximal accuracy, then minimal loss, then
    earliest. Index 0 is the initial pre-tuning state."""
    if len(accuracies) != len(losses) or not accuracies:
        raise ValueError("need matching, non-empty accuracy and loss sequences")
    best = 0
    for i in range(1, len(accuracies)):
        if accuracies[i] > accuracies[best] or (
            accuracies[i] == accuracies[best] and losses[i] < losses[best]
        ):
            best = i
    return best


@runtime_checkable
class EmbeddingProvider(Protocol):
    dims: int
    can_fine_tune: bool

    def embed(self, texts: Sequence[str], mode: str) -> np.ndarray: ...

    def fine_tune(
        self, texts: Sequence[str], labels: Sequence[int], params: AtalParams
    ) -> TrainingReport: ...

    def reset(self) -> None: ...


def decode_vectors(payload: str, rows: int, dims: int) -> np.ndarray:
    raw = base64.b64decode(payload)
    expected = rows * dims * 4
    if len(raw) != expected:
        raise ValueError(f"expected {expected} bytes for {rows}x{dims}, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f4").reshape(rows, dims).astype(np.float64)


def encode_vectors(matrix: np.ndarray) -> str:
    return base64.b64encode(
        np.ascontiguousarray(matrix, dtype="<f4").tobytes(order="C")
    ).decode("ascii")


class HttpEmbeddingProvider:
    """Client for a remote embedding/fine-tuning service.

    Endpoints: POST /embed, POST /finetune, POST /reset, GET /info.
    """

    def __init__(self, base_url: str, mode: str = "avg", timeout: float = 300.0):
        self.base_url = base_url.rstrip("/")
        self.mode = mode
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout)
        info = self._get("/info")
        self.model = info["model"]
        self.dims = int(info["dims"])
        self.can_fine_tune = bool(info["can_fine_tune"])

    def _get(self, path: str) -> dict:
        resp = self._client.get(path)
        resp.raise_for_status()
        return resp.json()

    def _post(self, path: str, payload: dict | None = None) -> dict:
        resp = self._client.post(path, json=payload if payload is not None else {})
        resp.raise_for_status()
        return resp.json()

    def embed(self, texts: Sequence[str], mode: str | None = None) -> np.ndarray:
        body = {"texts": list(texts), "model": self.model, "mode": mode or self.mode}
        data = self._post("/embed", body)
        return decode_vectors(data["vectors"], len(texts), int(data["dims"]))

    def fine_tune(
        self, texts: Sequence[str], labels: Sequence[int], params: AtalParams
    ) -> TrainingReport:
        body = {
            "texts": list(texts),
            "labels": [int(v) for v in labels],
            "hyperparams": {
                "epochs": params.epochs,
                "learning_rate": params.learning_rate,
                "train_batch": params.train_batch,
                "adam_epsilon": params.adam_epsilon,
            },
        }
        data = self._post("/finetune", body)
        return TrainingReport(
            epochs_run=int(data["epochs_run"]),
            best_epoch=int(data["best_epoch"]),
            initial_accuracy=float(data["initial_accuracy"]),
            initial_loss=float(data["initial_loss"]),
            train_accuracy=tuple(float(v) for v in data["train_accuracy"]),
            train_loss=tuple(float(v) for v in data["train_loss"]),
            diverged=bool(data.get("diverged", False)),
        )

    def reset(self) -> None:
        self._post("/reset")

    def close(self) -> None:
        self._client.close()
