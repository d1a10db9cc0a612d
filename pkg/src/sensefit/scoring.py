"""Precision / recall / F1 with IMS conventions: precision over answered
items, recall over all items, ``None`` where a ratio is undefined."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class PRF:
    total: int
    answered: int
    correct: int
    precision: float | None
    recall: float | None
    f1: float | None

    @classmethod
    def from_counts(cls, total: int, answered: int, correct: int) -> "PRF":
        if total == 0:
            return cls(0, answered, correct, None, None, None)
        p = correct / answered if answered else None
        r = correct / total
        if p is None or p + r == 0:
            f = 0.0
        elif answered == total:
            f = p  # p == r exactly; avoid rounding in the harmonic mean
        else:
            f = 2 * p * r / (p + r)
        return cls(total, answered, correct, p, r, f)

    def as_dict(self) -> dict:
        return {"total": self.total, "answered": self.answered, "correct": self.correct,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}
