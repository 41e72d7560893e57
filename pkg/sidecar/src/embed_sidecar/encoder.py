"""Transformer document encoders: registry, pooling, and bounded fine-tuning.

Documents are tokenized, split into 512-token fractions (classification token
plus up to 511 content tokens), encoded with the last hidden layer, pooled
per fraction (mean over content tokens, or the classification token), and
averaged over fractions. Fine-tuning attaches a binary head, trains the full
model for a bounded number of epochs, and keeps whichever state maximizes
train accuracy (ties: lower loss, then earlier epoch); a diverged run rolls
back to the pre-call weights.

The "test-tiny" model is a 2-layer, 16-dim encoder with a hash tokenizer,
deterministically initialized from a fixed seed so everything is testable
without downloads.
"""

from __future__ import annotations

import copy
import threading
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .fractions import TOKENS_PER_FRACTION, FractionPlan

TINY_SEED = 1234
TINY_VOCAB = 512
TINY_DIMS = 16


@dataclass(frozen=True)
class ModelInfo:
    checkpoint: str | None  # None = built-in deterministic test model
    dims: int
    can_fine_tune: bool
    cls_position: str  # "front" (real classification token) or "end" (eos stand-in)


MODEL_REGISTRY: dict[str, ModelInfo] = {
    "test-tiny": ModelInfo(None, TINY_DIMS, True, "front"),
    "bert-base": ModelInfo("bert-base-uncased", 768, True, "front"),
    "roberta-base": ModelInfo("roberta-base", 768, True, "front"),
    "distilbert-base": ModelInfo("distilbert-base-uncased", 768, True, "front"),
    "albert-base": ModelInfo("albert-base-v2", 768, True, "front"),
    "xlnet-base": ModelInfo("xlnet-base-cased", 768, False, "end"),
    "gpt2-small": ModelInfo("gpt2", 768, False, "end"),
}


@dataclass
class FineTuneReport:
    epochs_run: int
    best_epoch: int
    initial_accuracy: float
    initial_loss: float
    train_accuracy: list[float] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    diverged: bool = False

    def to_dict(self) -> dict:
        return {
            "epochs_run": self.epochs_run,
            "best_epoch": self.best_epoch,
            "initial_accuracy": self.initial_accuracy,
            "initial_loss": self.initial_loss,
            "train_accuracy": self.train_accuracy,
            "train_loss": self.train_loss,
            "diverged": self.diverged,
        }


def pick_best_state(accuracies: Sequence[float], losses: Sequence[float]) -> int:
    """State to keep: maximal accuracy, then minimal loss, then earliest.
    Index 0 is the pre-tuning state."""
    best = 0
    for i in range(1, len(accuracies)):
        if accuracies[i] > accuracies[best] or (
            accuracies[i] == accuracies[best] and losses[i] < losses[best]
        ):
            best = i
    return best


class HashTokenizer:
    """Deterministic whitespace/crc32 tokenizer for the built-in test model."""

    pad_id = 0
    cls_id = 1
    eos_id = 2

    def __init__(self, vocab_size: int = TINY_VOCAB):
        self.vocab_size = vocab_size

    def encode(self, text: str) -> list[int]:
        tokens = []
        for word in text.lower().split():
            word = "".join(ch for ch in word if ch.isalnum())
            if word:
                tokens.append(zlib.crc32(word.encode("utf-8")) % (self.vocab_size - 3) + 3)
        return tokens


class HfTokenizer:
    """Thin adapter over a Hugging Face tokenizer (content tokens only)."""

    def __init__(self, checkpoint: str):
        from transformers import AutoTokenizer

        self._tok = AutoTokenizer.from_pretrained(checkpoint)
        self.pad_id = self._tok.pad_token_id
        if self.pad_id is None:
            self.pad_id = self._tok.eos_token_id or 0
        self.cls_id = self._tok.cls_token_id
        self.eos_id = self._tok.eos_token_id
        if self.cls_id is None:
            self.cls_id = self.eos_id

    def encode(self, text: str) -> list[int]:
        return self._tok.encode(text, add_special_tokens=False)


def build_tiny_model() -> nn.Module:
    from transformers import BertConfig, BertModel

    config = BertConfig(
        vocab_size=TINY_VOCAB,
        hidden_size=TINY_DIMS,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=TOKENS_PER_FRACTION + 1,
    )
    torch.manual_seed(TINY_SEED)
    return BertModel(config)


class TransformerEncoder:
    """One loaded model with embed / fine_tune / reset, serialized by a lock."""

    def __init__(self, name: str, batch_size: int = 16):
        if name not in MODEL_REGISTRY:
            raise KeyError(
                f"unknown model {name!r}; registered: {', '.join(sorted(MODEL_REGISTRY))}"
            )
        self.name = name
        self.info = MODEL_REGISTRY[name]
        self.batch_size = batch_size
        self._lock = threading.Lock()

        if self.info.checkpoint is None:
            self.tokenizer = HashTokenizer()
            self.model = build_tiny_model()
        else:
            from transformers import AutoModel

            self.tokenizer = HfTokenizer(self.info.checkpoint)
            self.model = AutoModel.from_pretrained(self.info.checkpoint)
        self.model.eval()
        self._head: nn.Module | None = None
        self._pristine = copy.deepcopy(self.model.state_dict())

    @property
    def dims(self) -> int:
        return self.info.dims

    @property
    def can_fine_tune(self) -> bool:
        return self.info.can_fine_tune

    # --- inference -------------------------------------------------------

    def _fraction_inputs(self, token_ids: list[int]) -> list[list[int]]:
        plan = FractionPlan.build(len(token_ids))
        plan.validate()
        fractions = []
        for start, end in plan.spans:
            span = token_ids[start:end]
            if self.info.cls_position == "front":
                fractions.append([self.tokenizer.cls_id] + span)
            else:
                fractions.append(span + [self.tokenizer.eos_id])
        return fractions

    def _forward_batch(self, batch: list[list[int]]) -> torch.Tensor:
        width = max(len(f) for f in batch)
        ids = torch.full((len(batch), width), self.tokenizer.pad_id, dtype=torch.long)
        mask = torch.zeros((len(batch), width), dtype=torch.long)
        for row, fraction in enumerate(batch):
            ids[row, : len(fraction)] = torch.tensor(fraction, dtype=torch.long)
            mask[row, : len(fraction)] = 1
        with torch.no_grad():
            out = self.model(input_ids=ids, attention_mask=mask)
        return out.last_hidden_state

    def _pool_fraction(self, hidden: torch.Tensor, length: int, mode: str) -> torch.Tensor:
        """Pool one fraction; ``length`` is its unpadded token count."""
        if self.info.cls_position == "front":
            cls_vec = hidden[0]
            content = hidden[1:length]
        else:
            cls_vec = hidden[length - 1]
            content = hidden[: length - 1]
        if mode == "cls" or content.shape[0] == 0:
            # a fraction with no content tokens falls back to its cls vector
            return cls_vec
        return content.mean(dim=0)

    def embed(self, texts: Sequence[str], mode: str = "avg") -> np.ndarray:
        if mode not in ("avg", "cls"):
            raise ValueError(f"mode must be 'avg' or 'cls', got {mode!r}")
        with self._lock:
            self.model.eval()
            doc_fractions = [self._fraction_inputs(self.tokenizer.encode(t)) for t in texts]
            flat: list[list[int]] = [f for fractions in doc_fractions for f in fractions]
            pooled: list[torch.Tensor] = []
            for start in range(0, len(flat), self.batch_size):
                batch = flat[start : start + self.batch_size]
                hidden = self._forward_batch(batch)
                for row, fraction in enumerate(batch):
                    pooled.append(self._pool_fraction(hidden[row], len(fraction), mode))
            vectors = torch.empty((len(texts), self.dims))
            cursor = 0
            for row, fractions in enumerate(doc_fractions):
                k = len(fractions)
                vectors[row] = torch.stack(pooled[cursor : cursor + k]).mean(dim=0)
                cursor += k
            return vectors.numpy().astype(np.float32)

    # --- fine-tuning -------------------------------------------------------

    def _classify_logits(self, texts: Sequence[str]) -> torch.Tensor:
        """Logits from the classification vector of each text's first fraction."""
        fractions = [self._fraction_inputs(self.tokenizer.encode(t))[0] for t in texts]
        width = max(len(f) for f in fractions)
        ids = torch.full((len(fractions), width), self.tokenizer.pad_id, dtype=torch.long)
        mask = torch.zeros((len(fractions), width), dtype=torch.long)
        for row, fraction in enumerate(fractions):
            ids[row, : len(fraction)] = torch.tensor(fraction, dtype=torch.long)
            mask[row, : len(fraction)] = 1
        out = self.model(input_ids=ids, attention_mask=mask).last_hidden_state
        if self.info.cls_position == "front":
            cls_vec = out[:, 0]
        else:
            lengths = mask.sum(dim=1) - 1
            cls_vec = out[torch.arange(len(fractions)), lengths]
        return self._head(cls_vec)

    def _evaluate(self, texts: Sequence[str], labels: torch.Tensor) -> tuple[float, float]:
        self.model.eval()
        with torch.no_grad():
            logits = self._classify_logits(texts)
            loss = nn.functional.cross_entropy(logits, labels)
            accuracy = (logits.argmax(dim=1) == labels).float().mean()
        return float(accuracy), float(loss)

    def fine_tune(
        self,
        texts: Sequence[str],
        labels: Sequence[int],
        epochs: int = 15,
        learning_rate: float = 1e-5,
        train_batch: int = 4,
        adam_epsilon: float = 1e-8,
    ) -> FineTuneReport:
        """Train the full model plus a fresh binary head; keep the best state.

        Training uses each text's first fraction (standard truncation). On a
        non-finite loss the pre-call weights are restored and the report is
        flagged as diverged.
        """
        if not self.can_fine_tune:
            raise ValueError(f"model {self.name!r} is embed-only")
        if len(texts) < 2 or len(set(labels)) < 2:
            raise ValueError("fine-tuning needs at least 2 texts covering both classes")
        with self._lock:
            snapshot = copy.deepcopy(self.model.state_dict())
            torch.manual_seed(TINY_SEED)
            self._head = nn.Linear(self.dims, 2)
            y = torch.tensor([int(v) for v in labels], dtype=torch.long)

            initial_acc, initial_loss = self._evaluate(texts, y)
            accs = [initial_acc]
            losses = [initial_loss]
            best_state = copy.deepcopy(self.model.state_dict())
            best_index = 0

            optimizer = torch.optim.Adam(
                list(self.model.parameters()) + list(self._head.parameters()),
                lr=learning_rate,
                eps=adam_epsilon,
            )
            generator = torch.Generator().manual_seed(TINY_SEED)
            diverged = False
            epochs_run = 0
            for epoch in range(1, epochs + 1):
                self.model.train()
                order = torch.randperm(len(texts), generator=generator).tolist()
                for start in range(0, len(order), train_batch):
                    chunk = order[start : start + train_batch]
                    optimizer.zero_grad()
                    logits = self._classify_logits([texts[i] for i in chunk])
                    loss = nn.functional.cross_entropy(logits, y[chunk])
                    if not torch.isfinite(loss):
                        diverged = True
                        break
                    loss.backward()
                    optimizer.step()
                if diverged:
                    break
                epochs_run = epoch
                acc, loss_value = self._evaluate(texts, y)
                accs.append(acc)
                losses.append(loss_value)
                if pick_best_state(accs, losses) == epoch:
                    best_state = copy.deepcopy(self.model.state_dict())
                    best_index = epoch

            if diverged:
                self.model.load_state_dict(snapshot)
                self.model.eval()
                return FineTuneReport(
                    epochs_run=epochs_run,
                    best_epoch=0,
                    initial_accuracy=initial_acc,
                    initial_loss=initial_loss,
                    train_accuracy=accs[1:],
                    train_loss=losses[1:],
                    diverged=True,
                )

            self.model.load_state_dict(best_state)
            self.model.eval()
            return FineTuneReport(
                epochs_run=epochs_run,
                best_epoch=best_index,
                initial_accuracy=initial_acc,
                initial_loss=initial_loss,
                train_accuracy=accs[1:],
                train_loss=losses[1:],
            )

    def reset(self) -> None:
        """Restore the pristine pretrained weights."""
        with self._lock:
            self.model.load_state_dict(copy.deepcopy(self._pristine))
            self.model.eval()
            self._head = None
