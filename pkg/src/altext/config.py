"""JSON run-configuration parsing shared by the CLI and the service."""

from __future__ import annotations

import json
from pathlib import Path

from .engine import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_BUDGET,
    DEFAULT_CV_CADENCE,
    DEFAULT_RUN_SEEDS,
    DEFAULT_SEEDS_PER_CLASS,
    RepresentationSpec,
    RunConfig,
)
from .providers import AtalParams
from .strategies import STRATEGY_NAMES

REPRESENTATION_KINDS = ("tfidf", "lda", "wordvec", "alem", "provider")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def _fail(field: str, message: str) -> None:
    raise ConfigError(f"config field '{field}': {message}")


def _require_int(data: dict, field: str, default: int, minimum: int) -> int:
    value = data.get(field, default)
    if not isinstance(value, int) or isinstance(value, bool):
        _fail(field, f"expected an integer, got {value!r}")
    if value < minimum:
        _fail(field, f"must be >= {minimum}, got {value}")
    return value


def _parse_representation(raw) -> RepresentationSpec:
    if isinstance(raw, str):
        if raw in ("tfidf", "lda"):
            return RepresentationSpec(kind=raw)
        if raw.endswith(".alem"):
            return RepresentationSpec(kind="alem", path=raw)
        _fail(
            "representation",
            f"unknown shorthand {raw!r}; use 'tfidf', 'lda', a '.alem' path, "
            "or an object with a 'kind'",
        )
    if not isinstance(raw, dict):
        _fail("representation", f"expected a string or object, got {type(raw).__name__}")
    kind = raw.get("kind")
    if kind not in REPRESENTATION_KINDS:
        _fail(
            "representation.kind",
            f"unknown kind {kind!r}; valid kinds: {', '.join(REPRESENTATION_KINDS)}",
        )
    spec = RepresentationSpec(
        kind=kind,
        path=raw.get("path") or raw.get("lexicon"),
        url=raw.get("url"),
        mode=raw.get("mode", "avg"),
        topics=raw.get("topics", 300),
        iterations=raw.get("iterations", 1000),
        seed=raw.get("seed", 0),
    )
    if kind in ("wordvec", "alem") and not spec.path:
        _fail("representation.path", f"kind {kind!r} requires a file path")
    if kind == "provider" and not spec.url:
        _fail("representation.url", "kind 'provider' requires a service url")
    if spec.mode not in ("avg", "cls"):
        _fail("representation.mode", f"expected 'avg' or 'cls', got {spec.mode!r}")
    return spec


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} (line {exc.lineno})")
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")

    corpus = data.get("corpus")
    if not isinstance(corpus, str) or not corpus:
        _fail("corpus", "required: path to a JSON Lines corpus file")
    if "representation" not in data:
        _fail("representation", "required: builtin name, .alem path, or object")
    representation = _parse_representation(data["representation"])

    strategy = data.get("strategy")
    if strategy not in STRATEGY_NAMES:
        _fail(
            "strategy",
            f"unknown strategy {strategy!r}; valid names: {', '.join(STRATEGY_NAMES)}",
        )

    seeds_per_class = _require_int(data, "seeds_per_class", DEFAULT_SEEDS_PER_CLASS, 1)
    batch_size = _require_int(data, "batch_size", DEFAULT_BATCH_SIZE, 1)
    budget = _require_int(data, "budget", DEFAULT_BUDGET, 2 * seeds_per_class)
    cv_cadence = _require_int(data, "cv_cadence", DEFAULT_CV_CADENCE, 1)

    seeds_raw = data.get("seeds", list(DEFAULT_RUN_SEEDS))
    if (
        not isinstance(seeds_raw, list)
        or not seeds_raw
        or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds_raw)
    ):
        _fail("seeds", "expected a non-empty list of integers")

    atal = None
    if data.get("atal") is not None:
        raw = data["atal"]
        if not isinstance(raw, dict):
            _fail("atal", "expected an object")
        atal = AtalParams(
            cadence_rounds=raw.get("cadence_rounds", 20),
            epochs=raw.get("epochs", 15),
            learning_rate=raw.get("learning_rate", 1e-5),
            train_batch=raw.get("train_batch", 4),
            adam_epsilon=raw.get("adam_epsilon", 1e-8),
        )
        if representation.kind != "provider":
            _fail("atal", "adaptive tuning requires representation.kind = 'provider'")

    return RunConfig(
        corpus_path=corpus,
        representation=representation,
        strategy=strategy,
        batch_size=batch_size,
        budget=budget,
        seeds_per_class=seeds_per_class,
        cv_cadence=cv_cadence,
        seeds=tuple(seeds_raw),
        atal=atal,
        name=data.get("name", ""),
    )
