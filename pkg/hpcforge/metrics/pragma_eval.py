"""Clause, variable and operator evaluation of predicted pragmas."""

import logging
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, Literal, Optional, Sequence, Tuple

from ..errors import MissingOperand
from ..ompdata.normalize import NormalizedPragma
from .confusion import ConfusionCounts, Outcome, outcome_for

logger = logging.getLogger(__name__)

ClauseKind = Literal["private", "reduction"]
CURVE_THRESHOLDS = (2, 3, 4, 5, 6)


def _has(pragma: Optional[NormalizedPragma], kind: ClauseKind) -> bool:
    if pragma is None:
        return False
    if kind == "private":
        return bool(pragma.private_vars)
    if kind == "reduction":
        return pragma.reduction is not None
    raise ValueError(f"unknown clause kind {kind!r}")


def _vars(pragma: Optional[NormalizedPragma], kind: ClauseKind) -> AbstractSet[str]:
    if pragma is None:
        return frozenset()
    return pragma.private_vars if kind == "private" else pragma.reduction_vars


def clause_presence_eval(pred: Optional[NormalizedPragma], label: Optional[NormalizedPragma],
                         kind: ClauseKind) -> Outcome:
    """TP/FP/TN/FN for whether the clause ``kind`` appears; a missing pragma has no clauses."""
    return outcome_for(_has(pred, kind), _has(label, kind))


@dataclass(frozen=True)
class VariableMatchResult:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "VariableMatchResult") -> "VariableMatchResult":
        return VariableMatchResult(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def exact(self) -> bool:
        return self.fp == 0 and self.fn == 0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn}


def variable_set_eval(pred_vars: AbstractSet[str], label_vars: AbstractSet[str]) -> VariableMatchResult:
    """Order-free variable match on trimmed names."""
    predicted = {v.strip() for v in pred_vars}
    expected = {v.strip() for v in label_vars}
    return VariableMatchResult(
        tp=len(predicted & expected),
        fp=len(predicted - expected),
        fn=len(expected - predicted),
    )


def reduction_operator_eval(pred_op: Optional[str], label_op: Optional[str]) -> bool:
    """Whether two reduction operators are the same.

    Raises:
        MissingOperand: If either side has no reduction
    """
    if pred_op is None or label_op is None:
        raise MissingOperand(f"both sides need a reduction operator, got {pred_op!r} and {label_op!r}")
    return pred_op.strip() == label_op.strip()


def _curve(samples: Sequence[Tuple[int, bool]], thresholds: Sequence[int]) -> Dict[str, Optional[float]]:
    """Cumulative exact-match accuracy for samples with fewer than ``k`` label variables."""
    curve: Dict[str, Optional[float]] = {}
    for k in thresholds:
        hits = [exact for count, exact in samples if count < k]
        curve[f"<{k}"] = sum(hits) / len(hits) if hits else None
    curve["All"] = sum(exact for _, exact in samples) / len(samples) if samples else None
    return curve


@dataclass
class PragmaEvalReport:
    """Dataset-level pragma evaluation.

    Variable, operator and curve figures are computed on samples where both
    the prediction and the label carry the clause.
    """

    private: ConfusionCounts = field(default_factory=ConfusionCounts)
    reduction: ConfusionCounts = field(default_factory=ConfusionCounts)
    private_vars: VariableMatchResult = field(default_factory=VariableMatchResult)
    reduction_vars: VariableMatchResult = field(default_factory=VariableMatchResult)
    operator_correct: int = 0
    operator_total: int = 0
    private_curve: Dict[str, Optional[float]] = field(default_factory=dict)
    reduction_curve: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def operator_accuracy(self) -> Optional[float]:
        return self.operator_correct / self.operator_total if self.operator_total else None

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "kind": "pragma_eval",
            "private": self.private.to_dict(),
            "reduction": self.reduction.to_dict(),
            "private_vars": self.private_vars.to_dict(),
            "reduction_vars": self.reduction_vars.to_dict(),
            "operator": {"correct": self.operator_correct, "total": self.operator_total,
                         "accuracy": self.operator_accuracy},
            "private_curve": self.private_curve,
            "reduction_curve": self.reduction_curve,
        }


def evaluate_pragmas(preds: Sequence[Optional[NormalizedPragma]], labels: Sequence[Optional[NormalizedPragma]],
                     thresholds: Sequence[int] = CURVE_THRESHOLDS) -> PragmaEvalReport:
    """Evaluate aligned predictions against labels.

    Args:
        preds: Predicted pragma per sample, ``None`` for "no pragma"
        labels: Ground-truth pragma per sample
        thresholds: Variable-count cut points of the cumulative accuracy curves

    Returns:
        PragmaEvalReport over all samples

    Raises:
        ValueError: If the sequences differ in length
    """
    if len(preds) != len(labels):
        raise ValueError(f"{len(preds)} predictions for {len(labels)} labels")
    report = PragmaEvalReport()
    curves: Dict[str, list] = {"private": [], "reduction": []}
    for pred, label in zip(preds, labels):
        report.private = report.private.add(clause_presence_eval(pred, label, "private"))
        report.reduction = report.reduction.add(clause_presence_eval(pred, label, "reduction"))
        for kind in ("private", "reduction"):
            if not (_has(pred, kind) and _has(label, kind)):
                continue
            match = variable_set_eval(_vars(pred, kind), _vars(label, kind))
            curves[kind].append((len(_vars(label, kind)), match.exact))
            if kind == "private":
                report.private_vars = report.private_vars + match
            else:
                report.reduction_vars = report.reduction_vars + match
        if _has(pred, "reduction") and _has(label, "reduction"):
            report.operator_total += 1
            report.operator_correct += reduction_operator_eval(pred.reduction_op, label.reduction_op)
    report.private_curve = _curve(curves["private"], thresholds)
    report.reduction_curve = _curve(curves["reduction"], thresholds)
    logger.info(f"evaluated {len(labels)} pragmas: private {report.private.summary()}, "
                f"reduction {report.reduction.summary()}")
    return report
