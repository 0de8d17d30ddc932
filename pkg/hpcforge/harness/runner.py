"""Building and running benchmarks under a thread count."""

import enum
import json
import logging
import math
import os
import shlex
import shutil
import statistics
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError, ToolchainMissing
from ..parsing.source import Language
from ..utils.config_manager import HarnessConfig, ToolchainConfig

logger = logging.getLogger(__name__)

DEFAULT_BUILD = "{cc} {openmp_flag} -O2 {src} -o {bin} -lm"
DEFAULT_RUN = "{bin}"


class Verdict(str, enum.Enum):
    PASS = "Pass"
    COMPILE_FAIL = "CompileFail"
    RUN_FAIL = "RunFail"
    OUTPUT_MISMATCH = "OutputMismatch"
    TIMEOUT = "Timeout"


class BenchmarkSpec(BaseModel):
    """One benchmark: its sources, build and run templates and expected output.

    Templates are split with shell quoting rules after substituting
    ``{src}``, ``{bin}``, ``{cc}``, ``{cxx}``, ``{openmp_flag}`` and ``{dir}``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    sources: List[Path]
    language: Language = Language.C
    build: str = DEFAULT_BUILD
    run: str = DEFAULT_RUN
    expected_output: Optional[str] = None
    expected_file: Optional[Path] = None
    compare: Optional[Literal["exact", "numeric"]] = None
    timeout_s: float = Field(600.0, gt=0.0)
    env: Dict[str, str] = Field(default_factory=dict)

    @field_validator("sources")
    @classmethod
    def _non_empty(cls, value: List[Path]) -> List[Path]:
        if not value:
            raise ValueError("a benchmark needs at least one source file")
        return value

    @model_validator(mode="after")
    def _placeholders(self) -> "BenchmarkSpec":
        for placeholder in ("{src}", "{bin}"):
            if placeholder not in self.build:
                raise ValueError(f"build template {self.build!r} lacks {placeholder}")
        if "{bin}" not in self.run:
            raise ValueError(f"run template {self.run!r} lacks {{bin}}")
        return self

    def expected(self) -> Optional[str]:
        """Reference output, embedded or read from ``expected_file``."""
        if self.expected_output is not None:
            return self.expected_output
        if self.expected_file is not None:
            return self.expected_file.read_text(encoding="utf-8")
        return None

    def read_sources(self) -> Dict[str, str]:
        return {path.name: path.read_text(encoding="utf-8", errors="replace") for path in self.sources}


def load_benchmarks(path: Union[Path, str]) -> List[BenchmarkSpec]:
    """Read benchmark specs from JSON.

    The file holds one spec, a list of specs, or ``{"benchmarks": [...]}``.
    Relative paths are resolved against the file's directory.

    Raises:
        ConfigError: If the file is missing, not JSON or fails validation
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot read benchmark file {path}: {e}")
    if isinstance(data, dict) and "benchmarks" in data:
        data = data["benchmarks"]
    entries = data if isinstance(data, list) else [data]
    base = path.parent
    specs = []
    for entry in entries:
        entry = dict(entry)
        entry["sources"] = [str(base / s) for s in entry.get("sources", [])]
        if entry.get("expected_file"):
            entry["expected_file"] = str(base / entry["expected_file"])
        try:
            specs.append(BenchmarkSpec.model_validate(entry))
        except ValidationError as e:
            raise ConfigError(f"Invalid benchmark in {path}: {e}")
    return specs


@dataclass(frozen=True)
class RunOutcome:
    """Result of one build-and-run; wall time is kept for Pass and OutputMismatch only."""

    benchmark: str
    verdict: Verdict
    threads: Optional[int]
    wall_time_s: Optional[float] = None
    diagnostics: str = ""
    stdout: Optional[str] = None

    def __post_init__(self):
        timed = self.verdict in (Verdict.PASS, Verdict.OUTPUT_MISMATCH)
        if timed != (self.wall_time_s is not None):
            raise ValueError(f"{self.verdict.value} outcome {'needs' if timed else 'cannot have'} a wall time")

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict:
        return {"benchmark": self.benchmark, "verdict": self.verdict.value, "threads": self.threads,
                "wall_time_s": self.wall_time_s, "diagnostics": self.diagnostics}


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def outputs_match(actual: str, expected: str, mode: str = "exact", rel_epsilon: float = 1e-6) -> bool:
    """Compare program output with the reference.

    ``exact`` compares bytes. ``numeric`` compares line by line and token by
    token, numbers within ``rel_epsilon`` relative difference.
    """
    if mode == "exact":
        return actual == expected
    actual_lines = actual.strip().splitlines()
    expected_lines = expected.strip().splitlines()
    if len(actual_lines) != len(expected_lines):
        return False
    for got_line, want_line in zip(actual_lines, expected_lines):
        got, want = got_line.split(), want_line.split()
        if len(got) != len(want):
            return False
        for a, b in zip(got, want):
            if _is_number(a) and _is_number(b):
                if not math.isclose(float(a), float(b), rel_tol=rel_epsilon, abs_tol=0.0):
                    return False
            elif a != b:
                return False
    return True


def _fill(template: str, values: Mapping[str, str]) -> List[str]:
    return shlex.split(template.format(**values))


def _tail(text: str, limit: int = 2000) -> str:
    return text[-limit:] if len(text) > limit else text


def _run_env(bench: BenchmarkSpec, threads: Optional[int]) -> Dict[str, str]:
    env = dict(os.environ)
    env.update(bench.env)
    if threads is None:
        env.pop("OMP_NUM_THREADS", None)
    else:
        env["OMP_NUM_THREADS"] = str(threads)
    return env


def compile_and_run(bench: BenchmarkSpec, sources: Optional[Mapping[str, str]] = None,
                    threads: Optional[int] = 1, config: Optional[HarnessConfig] = None,
                    toolchain: Optional[ToolchainConfig] = None, check_output: bool = True) -> RunOutcome:
    """Build a benchmark in a scratch directory and run it ``config.repeats`` times.

    Args:
        bench: Benchmark spec
        sources: Patched file contents by file name; unpatched files are read from disk
        threads: Value of ``OMP_NUM_THREADS``; ``None`` runs with it unset
        config: Harness settings (repeats, compare mode, epsilon)
        toolchain: Compiler commands
        check_output: Compare stdout with the reference when one exists

    Returns:
        RunOutcome; a mismatch in any repeat makes the verdict OutputMismatch,
        and the wall time is the median over repeats

    Raises:
        ToolchainMissing: If the build command is not installed
    """
    config = config or HarnessConfig()
    toolchain = toolchain or ToolchainConfig()
    files = bench.read_sources()
    files.update(sources or {})
    mode = bench.compare or config.compare

    with tempfile.TemporaryDirectory(prefix=f"hpcforge-{bench.name}-") as tmp:
        workdir = Path(tmp)
        for name, text in files.items():
            (workdir / name).write_text(text, encoding="utf-8")
        binary = workdir / bench.name
        values = {
            "src": " ".join(shlex.quote(str(workdir / path.name)) for path in bench.sources),
            "bin": shlex.quote(str(binary)),
            "cc": toolchain.cc,
            "cxx": toolchain.cxx,
            "openmp_flag": toolchain.openmp_flag,
            "dir": shlex.quote(str(bench.sources[0].parent.resolve())),
        }
        build_cmd = _fill(bench.build, values)
        if shutil.which(build_cmd[0]) is None:
            raise ToolchainMissing(f"build command {build_cmd[0]!r} not found on PATH")

        try:
            build = subprocess.run(build_cmd, capture_output=True, text=True, timeout=bench.timeout_s, cwd=workdir)
        except subprocess.TimeoutExpired:
            return RunOutcome(bench.name, Verdict.TIMEOUT, threads, diagnostics="build timed out")
        if build.returncode != 0:
            logger.debug(f"{bench.name}: build failed: {_tail(build.stderr, 500)}")
            return RunOutcome(bench.name, Verdict.COMPILE_FAIL, threads, diagnostics=_tail(build.stderr))

        expected = bench.expected() if check_output else None
        run_cmd = _fill(bench.run, values)
        env = _run_env(bench, threads)
        times: List[float] = []
        mismatch = False
        stdout = ""
        for repeat in range(config.repeats):
            start = time.perf_counter()
            try:
                run = subprocess.run(run_cmd, capture_output=True, text=True, timeout=bench.timeout_s,
                                     cwd=workdir, env=env)
            except subprocess.TimeoutExpired:
                return RunOutcome(bench.name, Verdict.TIMEOUT, threads,
                                  diagnostics=f"run {repeat + 1} exceeded {bench.timeout_s}s")
            times.append(time.perf_counter() - start)
            if run.returncode != 0:
                return RunOutcome(bench.name, Verdict.RUN_FAIL, threads,
                                  diagnostics=f"exit code {run.returncode}: {_tail(run.stderr)}")
            stdout = run.stdout
            if expected is not None and not outputs_match(run.stdout, expected, mode, config.rel_epsilon):
                mismatch = True

    wall = statistics.median(times)
    if mismatch:
        return RunOutcome(bench.name, Verdict.OUTPUT_MISMATCH, threads, wall,
                          diagnostics="output differs from reference", stdout=stdout)
    logger.debug(f"{bench.name}: pass with threads={threads} in {wall:.4f}s")
    return RunOutcome(bench.name, Verdict.PASS, threads, wall, stdout=stdout)


def capture_reference(bench: BenchmarkSpec, out: Optional[Union[Path, str]] = None,
                      config: Optional[HarnessConfig] = None,
                      toolchain: Optional[ToolchainConfig] = None) -> BenchmarkSpec:
    """Run the unmodified benchmark once and record its stdout as the reference.

    Args:
        bench: Benchmark spec
        out: Optional file to write the reference to
        config: Harness settings
        toolchain: Compiler commands

    Returns:
        Spec with ``expected_output`` (or ``expected_file`` when ``out`` is given) set

    Raises:
        RuntimeError: If the unmodified benchmark does not build and run
    """
    single = (config or HarnessConfig()).model_copy(update={"repeats": 1})
    outcome = compile_and_run(bench, threads=None, config=single, toolchain=toolchain, check_output=False)
    if not outcome.passed:
        raise RuntimeError(f"{bench.name} did not build and run: {outcome.verdict.value} {outcome.diagnostics}")
    if out is not None:
        Path(out).write_text(outcome.stdout or "", encoding="utf-8")
        return bench.model_copy(update={"expected_file": Path(out), "expected_output": None})
    return bench.model_copy(update={"expected_output": outcome.stdout or ""})
