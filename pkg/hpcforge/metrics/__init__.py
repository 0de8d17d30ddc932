"""Evaluation metrics."""

from .codebleu import CodeBleuScore, codebleu
from .completion import score_completions
from .confusion import ConfusionCounts, Outcome, aggregate_confusion, format_rate
from .perplexity import perplexity
from .pragma_eval import (
    PragmaEvalReport,
    VariableMatchResult,
    clause_presence_eval,
    evaluate_pragmas,
    reduction_operator_eval,
    variable_set_eval,
)
from .speedup import SpeedupBucket, bucket_histogram, bucket_speedup

__all__ = [
    "CodeBleuScore",
    "ConfusionCounts",
    "Outcome",
    "PragmaEvalReport",
    "SpeedupBucket",
    "VariableMatchResult",
    "aggregate_confusion",
    "bucket_histogram",
    "bucket_speedup",
    "clause_presence_eval",
    "codebleu",
    "evaluate_pragmas",
    "format_rate",
    "perplexity",
    "reduction_operator_eval",
    "score_completions",
    "variable_set_eval",
]
