"""Whole-dataset labelling accuracy and normalized area under the learning curve.

The accuracy measure scores the combined output of the human oracle and the
classifier over the entire corpus: every human-assigned label counts as
correct, machine labels count against ground truth. The area under the
resulting curve is a trapezoid integral over labels-used, normalized by the
maximum attainable area so a perfect-from-the-start learner scores exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import LabelPool


@dataclass(frozen=True)
class CurvePoint:
    labels_used: int
    accuracy_plus: float


@dataclass
class LearningCurve:
    points: list[CurvePoint] = field(default_factory=list)
    representation: str = ""
    strategy: str = ""
    seed: int = 0

    def append(self, labels_used: int, accuracy_plus: float) -> None:
        if self.points and labels_used <= self.points[-1].labels_used:
            raise ValueError(
                f"labels_used must be strictly increasing "
                f"(got {labels_used} after {self.points[-1].labels_used})"
            )
        self.points.append(CurvePoint(labels_used, accuracy_plus))


def accuracy_plus(
    pool: LabelPool,
    predictions: Mapping[str, int],
    truth: Mapping[str, int],
    n_total: int,
) -> float:
    """Fraction of the corpus carrying a correct label, human or machine.

    Human-labelled documents always count as correct (the oracle is assumed
    infallible); a machine label counts iff it matches ground truth.
    ``predictions`` must cover exactly the unlabelled pool.
    """
    if set(predictions) != pool.unlabelled:
        missing = pool.unlabelled - set(predictions)
        extra = set(predictions) - pool.unlabelled
        raise ValueError(
            f"predictions must cover exactly U ({len(missing)} missing, {len(extra)} extra)"
        )
    if len(pool.labelled) + len(pool.unlabelled) != n_total:
        raise ValueError(
            f"pool covers {len(pool.labelled) + len(pool.unlabelled)} ids, "
            f"corpus size is {n_total}"
        )
    correct = len(pool.labelled)
    for doc_id, label in predictions.items():
        if doc_id not in truth:
            raise ValueError(f"no ground truth for document {doc_id!r}")
        if label == truth[doc_id]:
            correct += 1
    return correct / n_total


def aulc(curve: LearningCurve) -> float:
    """Trapezoid integral of accuracy over labels-used, normalized to [0, 1]."""
    pts = curve.points
    if len(pts) < 2:
        raise ValueError(f"AULC needs at least 2 curve points, got {len(pts)}")
    area = 0.0
    for a, b in zip(pts, pts[1:]):
        area += 0.5 * (a.accuracy_plus + b.accuracy_plus) * (b.labels_used - a.labels_used)
    span = pts[-1].labels_used - pts[0].labels_used
    return area / span


def summarize(
    runs: Sequence[LearningCurve],
) -> dict[tuple[str, str], tuple[float, float, int]]:
    """Mean and sample standard deviation of AULC per (representation, strategy).

    Uses the n-1 denominator; a single run reports std 0.
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for run in runs:
        groups.setdefault((run.representation, run.strategy), []).append(aulc(run))
    out: dict[tuple[str, str], tuple[float, float, int]] = {}
    for key, values in groups.items():
        n = len(values)
        mean = sum(values) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            std = var**0.5
        else:
            std = 0.0
        out[key] = (mean, std, n)
    return out
