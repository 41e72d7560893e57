"""Corpus loading, embedding-matrix I/O, and labelled/unlabelled pool bookkeeping.

A corpus is an ordered list of documents read from a JSON Lines file; file
order is canonical and every representation matrix is row-aligned to it.
Embedding matrices round-trip through the ALEM binary format (float32,
little-endian) with a JSON sidecar manifest carrying model/mode/id metadata.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

ALEM_MAGIC = b"ALEM"
ALEM_VERSION = 1


class CorpusError(ValueError):
    """Raised when a corpus file violates the JSON Lines document contract."""


class AlemFormatError(ValueError):
    """Raised when an embedding file or its manifest is malformed or misaligned."""


class LabelSource(str, Enum):
    HUMAN = "human"
    MACHINE = "machine"


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    true_label: Optional[int] = None  # 0 = negative, 1 = positive


@dataclass(frozen=True)
class Corpus:
    """Ordered, immutable document collection; index order is canonical."""

    documents: tuple[Document, ...]
    name: str = ""

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            if len(doc.text) < 1:
                raise CorpusError(f"document {doc.id!r} has empty text")
            if doc.true_label is not None and doc.true_label not in (0, 1):
                raise CorpusError(
                    f"document {doc.id!r} has label {doc.true_label!r}, expected 0 or 1"
                )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def ids(self) -> tuple[str, ...]:
        try:
            return self._ids
        except AttributeError:
            object.__setattr__(self, "_ids", tuple(d.id for d in self.documents))
            return self._ids

    @property
    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    def index_of(self, doc_id: str) -> int:
        try:
            return self._id_index[doc_id]
        except AttributeError:
            object.__setattr__(
                self, "_id_index", {d.id: i for i, d in enumerate(self.documents)}
            )
            return self._id_index[doc_id]

    @property
    def fully_labelled(self) -> bool:
        return all(d.true_label is not None for d in self.documents)

    def true_labels(self) -> dict[str, int]:
        """Ground-truth labels keyed by id; requires a fully labelled corpus."""
        missing = [d.id for d in self.documents if d.true_label is None]
        if missing:
            raise CorpusError(
                f"corpus {self.name!r} is not fully labelled "
                f"({len(missing)} documents missing labels, first: {missing[0]!r})"
            )
        return {d.id: d.true_label for d in self.documents}


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense row-per-document representation aligned to a corpus.

    ``mode`` is "avg" or "cls" for transformer representations and "n/a"
    for everything else.
    """

    values: np.ndarray  # (rows, dims) float32 or float64
    ids: tuple[str, ...]
    model: str
    mode: str = "n/a"

    def __post_init__(self):
        if self.values.ndim != 2:
            raise AlemFormatError("embedding values must be a 2-D matrix")
        if self.values.shape[0] != len(self.ids):
            raise AlemFormatError(
                f"matrix has {self.values.shape[0]} rows but manifest lists "
                f"{len(self.ids)} ids"
            )
        bad = np.argwhere(~np.isfinite(self.values))
        if bad.size:
            r, c = bad[0]
            raise AlemFormatError(f"non-finite value at row {r}, col {c}")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    def check_alignment(self, corpus: Corpus) -> None:
        if self.ids != corpus.ids:
            raise AlemFormatError(
                "manifest ids do not match corpus order "
                f"(corpus {len(corpus)} docs, manifest {len(self.ids)} ids)"
            )


def load_corpus(path: str | Path, name: str | None = None) -> Corpus:
    """Parse a JSON Lines corpus file: one ``{"id", "text", "label"?}`` per line."""
    path = Path(path)
    docs: list[Document] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            doc_id = obj.get("id")
            text = obj.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise CorpusError(f"{path}:{lineno}: missing or invalid 'id'")
            if doc_id in seen:
                raise CorpusError(
                    f"{path}:{lineno}: duplicate id {doc_id!r} (first seen on line {seen[doc_id]})"
                )
            seen[doc_id] = lineno
            if not isinstance(text, str) or len(text) < 1:
                raise CorpusError(f"{path}:{lineno}: document {doc_id!r} has empty text")
            label = obj.get("label")
            if label is not None and label not in (0, 1):
                raise CorpusError(
                    f"{path}:{lineno}: document {doc_id!r} has label {label!r}, expected 0 or 1"
                )
            docs.append(Document(id=doc_id, text=text, true_label=label))
    return Corpus(documents=tuple(docs), name=name if name is not None else path.stem)


def save_embeddings(path: str | Path, matrix: EmbeddingMatrix) -> None:
    """Write an ALEM file plus its ``<path>.alem.json`` manifest sidecar.

    Layout: magic "ALEM", u32-LE version, u32-LE rows, u32-LE dims, then
    rows*dims IEEE-754 binary32 little-endian values, row-major.
    """
    path = Path(path)
    values = np.ascontiguousarray(matrix.values, dtype="<f4")
    with path.open("wb") as fh:
        fh.write(ALEM_MAGIC)
        fh.write(struct.pack("<III", ALEM_VERSION, matrix.rows, matrix.dims))
        fh.write(values.tobytes(order="C"))
    manifest = {"model": matrix.model, "mode": matrix.mode, "ids": list(matrix.ids)}
    manifest_path(path).write_text(json.dumps(manifest), encoding="utf-8")


def manifest_path(path: str | Path) -> Path:
    return Path(str(path) + ".alem.json")


def load_embeddings(path: str | Path, corpus: Corpus | None = None) -> EmbeddingMatrix:
    """Read an ALEM file and manifest; if ``corpus`` is given, enforce row alignment."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != ALEM_MAGIC:
            raise AlemFormatError(f"{path}: bad magic {magic!r}, expected {ALEM_MAGIC!r}")
        header = fh.read(12)
        if len(header) != 12:
            raise AlemFormatError(f"{path}: truncated header")
        version, rows, dims = struct.unpack("<III", header)
        if version != ALEM_VERSION:
            raise AlemFormatError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = rows * dims * 4
    if len(payload) != expected:
        raise AlemFormatError(
            f"{path}: expected {expected} payload bytes for {rows}x{dims}, got {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(rows, dims)

    mpath = manifest_path(path)
    if not mpath.exists():
        raise AlemFormatError(f"missing manifest sidecar {mpath}")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    ids = manifest.get("ids")
    if not isinstance(ids, list) or len(ids) != rows:
        raise AlemFormatError(
            f"{mpath}: manifest lists {len(ids) if isinstance(ids, list) else 'no'} ids "
            f"for {rows} rows"
        )
    matrix = EmbeddingMatrix(
        values=values,
        ids=tuple(ids),
        model=manifest.get("model", ""),
        mode=manifest.get("mode", "n/a"),
    )
    if corpus is not None:
        matrix.check_alignment(corpus)
    return matrix


@dataclass
class LabelPool:
    """Partition of corpus ids into an oracle-labelled set L and unlabelled pool U.

    ``machine`` holds the classifier's current predictions for U; its keys are
    always a subset of ``unlabelled``. Ids never move back from labelled to
    unlabelled.
    """

    labelled: dict[str, int] = field(default_factory=dict)
    unlabelled: set[str] = field(default_factory=set)
    machine: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "LabelPool":
        return cls(unlabelled=set(corpus.ids))

    @property
    def labelled_count(self) -> int:
        return len(self.labelled)

    def assign_human(self, doc_id: str, label: int) -> None:
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label!r}")
        if doc_id in self.labelled:
            raise ValueError(f"document {doc_id!r} is already labelled")
        if doc_id not in self.unlabelled:
            raise ValueError(f"document {doc_id!r} is not in the unlabelled pool")
        self.unlabelled.discard(doc_id)
        self.machine.pop(doc_id, None)
        self.labelled[doc_id] = label

    def assign_batch(self, labels: dict[str, int]) -> None:
        """Apply a batch of human labels atomically: all valid or none applied."""
        for doc_id, label in labels.items():
            if label not in (0, 1):
                raise ValueError(f"label for {doc_id!r} must be 0 or 1, got {label!r}")
            if doc_id not in self.unlabelled:
                raise ValueError(f"document {doc_id!r} is not in the unlabelled pool")
        for doc_id, label in labels.items():
            self.assign_human(doc_id, label)

    def set_machine_labels(self, predictions: dict[str, int]) -> None:
        """Replace machine labels; predictions must cover exactly the unlabelled pool."""
        if set(predictions) != self.unlabelled:
            missing = self.unlabelled - set(predictions)
            extra = set(predictions) - self.unlabelled
            raise ValueError(
                f"machine predictions must cover exactly U "
                f"({len(missing)} missing, {len(extra)} extra)"
            )
        self.machine = dict(predictions)


def seed_pool(corpus: Corpus, seed: int, per_class: int = 5) -> LabelPool:
    """Draw the initial labelled set: ``per_class`` positives and negatives,
    uniformly without replacement, deterministic for a given seed.

    Requires ground-truth labels (simulated-oracle mode). Live sessions seed
    class-blind via :func:`seed_candidates` instead.
    """
    rng = np.random.default_rng(seed)
    pool = LabelPool.from_corpus(corpus)
    positives = [d.id for d in corpus if d.true_label == 1]
    negatives = [d.id for d in corpus if d.true_label == 0]
    if len(positives) < per_class or len(negatives) < per_class:
        raise ValueError(
            f"need at least {per_class} documents of each class, "
            f"got {len(positives)} positive and {len(negatives)} negative"
        )
    chosen_pos = rng.choice(len(positives), size=per_class, replace=False)
    chosen_neg = rng.choice(len(negatives), size=per_class, replace=False)
    truth = {d.id: d.true_label for d in corpus}
    for idx in sorted(chosen_pos):
        pool.assign_human(positives[idx], truth[positives[idx]])
    for idx in sorted(chosen_neg):
        pool.assign_human(negatives[idx], truth[negatives[idx]])
    return pool


def seed_candidates(corpus: Corpus, seed: int, size: int = 10) -> list[str]:
    """Class-blind uniform seed draw for live-oracle sessions (no ground truth)."""
    if len(corpus) < size:
        raise ValueError(f"corpus has {len(corpus)} documents, need at least {size}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(corpus), size=size, replace=False)
    ids = corpus.ids
    return [ids[i] for i in sorted(idx)]


def write_corpus(path: str | Path, docs: Iterable[Document]) -> None:
    """Serialize documents back to JSON Lines (helper for fixtures and exports)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            obj: dict = {"id": doc.id, "text": doc.text}
            if doc.true_label is not None:
                obj["label"] = doc.true_label
            fh.write(json.dumps(obj) + "\n")
