"""ALEM matrix files: magic "ALEM", u32-LE version/rows/dims header, then
float32 little-endian row-major values, with a JSON manifest sidecar."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ALEM"
VERSION = 1


def write_alem(
    path: str | Path,
    values: np.ndarray,
    ids: list[str],
    model: str,
    mode: str,
    extra_manifest: dict | None = None,
) -> None:
    path = Path(path)
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2 or values.shape[0] != len(ids):
        raise ValueError(f"matrix {values.shape} does not match {len(ids)} ids")
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, values.shape[0], values.shape[1]))
        fh.write(values.tobytes(order="C"))
    manifest = {"model": model, "mode": mode, "ids": list(ids)}
    if extra_manifest:
        manifest.update(extra_manifest)
    Path(str(path) + ".alem.json").write_text(json.dumps(manifest), encoding="utf-8")


def read_corpus_texts(path: str | Path) -> tuple[list[str], list[str]]:
    """Minimal JSON Lines corpus reader: returns (ids, texts) in file order."""
    ids: list[str] = []
    seen: set[str] = set()
    texts: list[str] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            doc_id, text = obj.get("id"), obj.get("text")
            if not isinstance(doc_id, str) or not isinstance(text, str) or not text:
                raise ValueError(f"{path}:{lineno}: need non-empty 'id' and 'text'")
            if doc_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            ids.append(doc_id)
            texts.append(text)
    return ids, texts
