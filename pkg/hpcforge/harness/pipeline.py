"""End-to-end evaluation: accuracy, injection, compile-and-run and reclassification."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from ..errors import InjectionError, PragmaSyntaxError, SpanDrift
from ..metrics.confusion import Outcome
from ..ompdata.dataset import LoopSample
from ..parsing.functions import content_hash
from ..utils.config_manager import HarnessConfig, ToolchainConfig
from ..utils.system_info import get_system_info
from .accuracy import ConfusionReport, accuracy_test, reclassify_fp
from .injection import inject_pragma
from .models.base import ModelEndpoint
from .runner import BenchmarkSpec, RunOutcome, Verdict, compile_and_run

logger = logging.getLogger(__name__)


def compile_run_table(outcomes: Iterable[RunOutcome]) -> pd.DataFrame:
    """Verdict tallies per thread count, every verdict column present."""
    columns = [v.value for v in Verdict]
    counts: Dict[object, Dict[str, int]] = {}
    for outcome in outcomes:
        key = "default" if outcome.threads is None else outcome.threads
        row = counts.setdefault(key, dict.fromkeys(columns, 0))
        row[outcome.verdict.value] += 1
    frame = pd.DataFrame.from_dict(counts, orient="index", columns=columns).fillna(0).astype(int)
    frame.index.name = "threads"
    return frame


def benchmark_summary(outcomes: Iterable[RunOutcome]) -> pd.DataFrame:
    """Pass and fail counts per benchmark."""
    counts: Dict[str, Dict[str, int]] = {}
    for outcome in outcomes:
        row = counts.setdefault(outcome.benchmark, {"pass": 0, "fail": 0})
        row["pass" if outcome.passed else "fail"] += 1
    frame = pd.DataFrame.from_dict(counts, orient="index", columns=["pass", "fail"]).fillna(0).astype(int)
    frame.index.name = "benchmark"
    return frame


@dataclass
class EndToEndReport:
    accuracy: ConfusionReport
    adjusted: ConfusionReport
    outcomes: Dict[str, List[RunOutcome]] = field(default_factory=dict)
    system: Dict[str, object] = field(default_factory=dict)

    def all_outcomes(self) -> List[RunOutcome]:
        return [o for runs in self.outcomes.values() for o in runs]

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "kind": "end_to_end",
            "accuracy": self.accuracy.to_dict(),
            "adjusted": self.adjusted.to_dict(),
            "outcomes": {sid: [o.to_dict() for o in runs] for sid, runs in self.outcomes.items()},
            "compile_run": {str(k): v for k, v in compile_run_table(self.all_outcomes()).to_dict("index").items()},
            "system": self.system,
        }


def index_benchmarks(benchmarks: Sequence[BenchmarkSpec]) -> Dict[str, Tuple[BenchmarkSpec, str]]:
    """Map the content hash of every benchmark source to (benchmark, file name)."""
    index = {}
    for bench in benchmarks:
        for path in bench.sources:
            index[content_hash(path.read_bytes())] = (bench, path.name)
    return index


def run_prediction(bench: BenchmarkSpec, file_name: str, sample: LoopSample, pragma: str,
                   threads: Sequence[int], config: HarnessConfig, toolchain: ToolchainConfig) -> List[RunOutcome]:
    """Inject one predicted pragma and run the benchmark at every thread count."""
    original = bench.read_sources()[file_name]
    try:
        patched = inject_pragma(original, sample.benchmark_ref.loop_span, pragma, bench.language)
    except (SpanDrift, InjectionError, PragmaSyntaxError) as e:
        logger.warning(f"cannot inject into {bench.name} for {sample.id}: {e}")
        return [RunOutcome(bench.name, Verdict.COMPILE_FAIL, t, diagnostics=f"injection failed: {e}") for t in threads]
    return [compile_and_run(bench, {file_name: patched}, t, config, toolchain) for t in threads]


def evaluate_end_to_end(benchmarks: Sequence[BenchmarkSpec], dataset: Sequence[LoopSample],
                        model: ModelEndpoint, threads: Optional[Sequence[int]] = None,
                        config: Optional[HarnessConfig] = None,
                        toolchain: Optional[ToolchainConfig] = None) -> EndToEndReport:
    """Accuracy test followed by compile-and-run of every positive prediction.

    A false positive becomes a true positive when its injected pragma passes
    at every thread count. Predictions whose loop is not in any benchmark
    cannot be checked and stay as they are.

    Args:
        benchmarks: Benchmarks holding the dataset's loops
        dataset: Loop samples with benchmark references
        model: Model endpoint
        threads: Thread counts; ``config.threads`` when omitted
        config: Harness settings
        toolchain: Compiler commands

    Returns:
        EndToEndReport with raw and reclassified confusion reports

    Raises:
        ToolchainMissing: If the build command is not installed
    """
    config = config or HarnessConfig()
    toolchain = toolchain or ToolchainConfig()
    threads = list(threads or config.threads)
    system = get_system_info(toolchain.cc)
    report = accuracy_test(dataset, model, config.max_in_flight, system)
    index = index_benchmarks(benchmarks)
    by_id = {sample.id: sample for sample in dataset}

    outcomes: Dict[str, List[RunOutcome]] = {}
    verdicts: Dict[str, bool] = {}
    for result in report.samples:
        if result.prediction is None or not result.prediction.parallelizable:
            continue
        sample = by_id[result.sample_id]
        located = index.get(sample.benchmark_ref.file_id) if sample.benchmark_ref else None
        if located is None:
            logger.warning(f"sample {sample.id} is not in any benchmark; compile-and-run skipped")
            if result.outcome is Outcome.FP:
                verdicts[sample.id] = False
            continue
        bench, file_name = located
        runs = run_prediction(bench, file_name, sample, result.prediction.pragma, threads, config, toolchain)
        outcomes[sample.id] = runs
        verdicts[sample.id] = all(run.passed for run in runs)

    adjusted = reclassify_fp(report, verdicts)
    logger.info(f"end-to-end: {report.counts.summary()} -> {adjusted.counts.summary()}")
    return EndToEndReport(report, adjusted, outcomes, system)
