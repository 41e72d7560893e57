"""Transformer embedding inference and fine-tuning sidecar."""

from .encoder import MODEL_REGISTRY, FineTuneReport, TransformerEncoder, pick_best_state
from .fractions import TOKENS_PER_FRACTION, FractionPlan

__version__ = "0.1.0"

__all__ = [
    "MODEL_REGISTRY",
    "FineTuneReport",
    "FractionPlan",
    "TOKENS_PER_FRACTION",
    "TransformerEncoder",
    "pick_best_state",
]
