"""Confusion counts and the rates derived from them."""

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional


class Outcome(str, enum.Enum):
    TP = "TP"
    FP = "FP"
    TN = "TN"
    FN = "FN"


def outcome_for(predicted: bool, actual: bool) -> Outcome:
    if predicted:
        return Outcome.TP if actual else Outcome.FP
    return Outcome.FN if actual else Outcome.TN


def _rate(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def format_rate(rate: Optional[float]) -> str:
    """Whole percent, rounded down; ``undefined`` when the rate has no denominator."""
    if rate is None:
        return "undefined"
    return f"{math.floor(rate * 100 + 1e-9)}%"


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts.

    Rates are ``None`` when their denominator is zero, never 0 or 1.
    """

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> Optional[float]:
        return _rate(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Optional[float]:
        return _rate(self.tp, self.tp + self.fn)

    @property
    def accuracy(self) -> Optional[float]:
        return _rate(self.tp + self.tn, self.total)

    @property
    def f1(self) -> Optional[float]:
        precision, recall = self.precision, self.recall
        if precision is None or recall is None or precision + recall == 0:
            return None
        return 2 * precision * recall / (precision + recall)

    def add(self, outcome: Outcome) -> "ConfusionCounts":
        return self + ConfusionCounts(**{outcome.value.lower(): 1})

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "precision": self.precision, "recall": self.recall,
            "accuracy": self.accuracy, "f1": self.f1,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConfusionCounts":
        return cls(int(data["tp"]), int(data["fp"]), int(data["tn"]), int(data["fn"]))

    def summary(self) -> str:
        """``precision recall accuracy`` as whole percentages."""
        return " ".join(format_rate(r) for r in (self.precision, self.recall, self.accuracy))


def aggregate_confusion(outcomes: Iterable[Outcome]) -> ConfusionCounts:
    counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for outcome in outcomes:
        counts[Outcome(outcome).value.lower()] += 1
    return ConfusionCounts(**counts)
