"""Active-learning engine and annotation harness for binary text labelling."""

from .corpus import (
    AlemFormatError,
    Corpus,
    CorpusError,
    Document,
    EmbeddingMatrix,
    LabelPool,
    load_corpus,
    load_embeddings,
    save_embeddings,
    seed_pool,
)
from .engine import (
    RepresentationSpec,
    RunConfig,
    build_representation,
    run_atal,
    run_experiment,
    run_simulation,
)
from .metrics import CurvePoint, LearningCurve, accuracy_plus, aulc, summarize
from .providers import AtalParams, EmbeddingProvider, TrainingReport, pick_rollback_state
from .svm import SvmModel, SvmParams

__version__ = "0.1.0"

__all__ = [
    "AlemFormatError",
    "AtalParams",
    "Corpus",
    "CorpusError",
    "CurvePoint",
    "Document",
    "EmbeddingMatrix",
    "EmbeddingProvider",
    "LabelPool",
    "LearningCurve",
    "RepresentationSpec",
    "RunConfig",
    "SvmModel",
    "SvmParams",
    "TrainingReport",
    "accuracy_plus",
    "aulc",
    "build_representation",
    "load_corpus",
    "load_embeddings",
    "pick_rollback_state",
    "run_atal",
    "run_experiment",
    "run_simulation",
    "save_embeddings",
    "seed_pool",
    "summarize",
]
