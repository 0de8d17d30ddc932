"""Thread-count sweeps and speedup buckets."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import pandas as pd

from ..metrics.speedup import SpeedupBucket, bucket_histogram, bucket_speedup
from ..utils.config_manager import HarnessConfig, ToolchainConfig
from ..utils.system_info import get_system_info
from .runner import BenchmarkSpec, RunOutcome, compile_and_run

logger = logging.getLogger(__name__)


@dataclass
class BenchmarkScale:
    """Baseline and per-thread outcomes of one benchmark."""

    name: str
    baseline: RunOutcome
    runs: Dict[int, RunOutcome] = field(default_factory=dict)

    def speedup(self, threads: int) -> Optional[float]:
        """Baseline time over run time; defined only when both passed."""
        run = self.runs.get(threads)
        if run is None or not (run.passed and self.baseline.passed) or not run.wall_time_s:
            return None
        return self.baseline.wall_time_s / run.wall_time_s

    def bucket(self, threads: int) -> Optional[SpeedupBucket]:
        speedup = self.speedup(threads)
        return bucket_speedup(speedup) if speedup is not None else None


@dataclass
class ScaleReport:
    """Scale-test results.

    ``baseline`` is ``"default"`` (no ``OMP_NUM_THREADS`` set) or
    ``"threads1"`` (one thread).
    """

    threads: List[int]
    benchmarks: List[BenchmarkScale] = field(default_factory=list)
    baseline: str = "default"
    system: Dict[str, object] = field(default_factory=dict)

    def histograms(self) -> Dict[int, Dict[SpeedupBucket, int]]:
        """Bucket counts per thread count over benchmarks whose runs passed."""
        return {
            t: bucket_histogram(s for s in (b.speedup(t) for b in self.benchmarks) if s is not None)
            for t in self.threads
        }

    def to_frame(self) -> pd.DataFrame:
        """Speedup table: one row per benchmark, one column per thread count."""
        rows = {b.name: {t: b.speedup(t) for t in self.threads} for b in self.benchmarks}
        frame = pd.DataFrame.from_dict(rows, orient="index", columns=self.threads, dtype=float)
        frame.index.name = "benchmark"
        return frame

    def histogram_frame(self) -> pd.DataFrame:
        histograms = self.histograms()
        frame = pd.DataFrame(
            [[histograms[t][bucket] for bucket in SpeedupBucket] for t in self.threads],
            index=pd.Index(self.threads, name="threads"),
            columns=[bucket.value for bucket in SpeedupBucket],
        )
        return frame

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "kind": "scale_report",
            "baseline": self.baseline,
            "threads": self.threads,
            "benchmarks": [
                {
                    "name": b.name,
                    "baseline": b.baseline.to_dict(),
                    "runs": {str(t): {**r.to_dict(), "speedup": b.speedup(t),
                                      "bucket": b.bucket(t).value if b.bucket(t) else None}
                             for t, r in b.runs.items()},
                }
                for b in self.benchmarks
            ],
            "histograms": {str(t): {k.value: v for k, v in h.items()} for t, h in self.histograms().items()},
            "system": self.system,
        }


def scale_test(benchmarks: Sequence[BenchmarkSpec], thread_list: Sequence[int] = (1, 4, 8, 16),
               sources: Optional[Mapping[str, Mapping[str, str]]] = None,
               config: Optional[HarnessConfig] = None,
               toolchain: Optional[ToolchainConfig] = None) -> ScaleReport:
    """Run every benchmark at a baseline and at each thread count.

    Failures of one benchmark are recorded in its outcomes; the sweep continues.

    Args:
        benchmarks: Benchmarks to sweep
        thread_list: ``OMP_NUM_THREADS`` values
        sources: Optional patched sources per benchmark name
        config: Harness settings, including the baseline mode
        toolchain: Compiler commands

    Returns:
        ScaleReport with per-benchmark outcomes and speedups

    Raises:
        ToolchainMissing: If the build command is not installed
    """
    config = config or HarnessConfig()
    toolchain = toolchain or ToolchainConfig()
    threads = [int(t) for t in thread_list]
    if any(t <= 0 for t in threads):
        raise ValueError(f"thread counts must be positive, got {threads}")
    report = ScaleReport(threads, baseline=config.baseline, system=get_system_info(toolchain.cc))
    baseline_threads = None if config.baseline == "default" else 1
    for bench in benchmarks:
        patched = (sources or {}).get(bench.name)
        baseline = compile_and_run(bench, patched, baseline_threads, config, toolchain)
        entry = BenchmarkScale(bench.name, baseline)
        if not baseline.passed:
            logger.warning(f"{bench.name}: baseline {baseline.verdict.value}; speedups undefined")
        for t in threads:
            entry.runs[t] = compile_and_run(bench, patched, t, config, toolchain)
            logger.info(f"{bench.name} threads={t}: {entry.runs[t].verdict.value} speedup={entry.speedup(t)}")
        report.benchmarks.append(entry)
    return report
