"""Model evaluation harness."""

from .accuracy import ConfusionReport, SampleResult, accuracy_test, reclassify_counts, reclassify_fp
from .injection import inject_pragma
from .models import HeuristicModel, HttpModel, ModelEndpoint, OfflineModel, ReplayModel, load_model
from .pipeline import EndToEndReport, benchmark_summary, compile_run_table, evaluate_end_to_end
from .prediction import GPT_PRAGMA_PROMPT, ModelPrediction, predict
from .runner import BenchmarkSpec, RunOutcome, Verdict, capture_reference, compile_and_run, load_benchmarks
from .scale import BenchmarkScale, ScaleReport, scale_test

__all__ = [
    "BenchmarkScale",
    "BenchmarkSpec",
    "ConfusionReport",
    "EndToEndReport",
    "GPT_PRAGMA_PROMPT",
    "HeuristicModel",
    "HttpModel",
    "ModelEndpoint",
    "ModelPrediction",
    "OfflineModel",
    "ReplayModel",
    "RunOutcome",
    "SampleResult",
    "ScaleReport",
    "Verdict",
    "accuracy_test",
    "benchmark_summary",
    "capture_reference",
    "compile_and_run",
    "compile_run_table",
    "evaluate_end_to_end",
    "inject_pragma",
    "load_benchmarks",
    "load_model",
    "predict",
    "reclassify_counts",
    "reclassify_fp",
    "scale_test",
]
