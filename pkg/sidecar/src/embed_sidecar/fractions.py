"""Splitting long token sequences into encoder-sized fractions.

Encoders accept at most 512 positions, one of which is the classification
token, so a document of W tokens is cut into k = ceil(W / 511) contiguous
spans of at most 511 tokens each. Spans partition the sequence exactly; an
empty document still yields one (empty) fraction so it gets a vector.
"""

from __future__ import annotations

from dataclasses import dataclass

TOKENS_PER_FRACTION = 511


@dataclass(frozen=True)
class FractionPlan:
    total_tokens: int
    spans: tuple[tuple[int, int], ...]  # [start, end) into the token sequence

    @property
    def k(self) -> int:
        return len(self.spans)

    @classmethod
    def build(cls, total_tokens: int, size: int = TOKENS_PER_FRACTION) -> "FractionPlan":
        if total_tokens < 0:
            raise ValueError(f"token count must be non-negative, got {total_tokens}")
        if total_tokens == 0:
            return cls(total_tokens=0, spans=((0, 0),))
        spans = tuple(
            (start, min(start + size, total_tokens))
            for start in range(0, total_tokens, size)
        )
        return cls(total_tokens=total_tokens, spans=spans)

    def validate(self) -> None:
        """Spans must cover all tokens exactly once, in order."""
        cursor = 0
        for start, end in self.spans:
            if start != cursor or end < start:
                raise ValueError(f"spans do not partition the sequence at {start}")
            cursor = end
        if cursor != self.total_tokens:
            raise ValueError(f"spans cover {cursor} of {self.total_tokens} tokens")
