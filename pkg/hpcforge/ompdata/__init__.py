"""OpenMP loop datasets."""

from .checks import LoopAnalysis, LoopCheck, analyze_loop, check_loop, induction_variable
from .dataset import (
    BenchmarkRef,
    LoopSample,
    clause_histogram,
    extract_dataset,
    pragma_breakdown,
    read_samples,
    write_samples,
)
from .normalize import Base, NormalizedPragma, merge_stacked, normalize_pragma, parse_normalized

__all__ = [
    "Base",
    "BenchmarkRef",
    "LoopAnalysis",
    "LoopCheck",
    "LoopSample",
    "NormalizedPragma",
    "analyze_loop",
    "check_loop",
    "clause_histogram",
    "extract_dataset",
    "induction_variable",
    "merge_stacked",
    "normalize_pragma",
    "parse_normalized",
    "pragma_breakdown",
    "read_samples",
    "write_samples",
]
