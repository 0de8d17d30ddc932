"""Unit tests for the evaluation harness with the toolchain mocked out."""

import json
import os
import subprocess
from pathlib import Path
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from hpcforge.corpus.ingest import RawFile
from hpcforge.errors import ConfigError, MissingVerdict, PragmaSyntaxError, SpanDrift, ToolchainMissing
from hpcforge.harness.accuracy import ConfusionReport, accuracy_test, reclassify_counts, reclassify_fp
from hpcforge.harness.injection import inject_pragma
from hpcforge.harness.models import OfflineModel, ReplayModel
from hpcforge.harness.pipeline import benchmark_summary, compile_run_table, evaluate_end_to_end
from hpcforge.harness.prediction import predict
from hpcforge.harness.runner import (
    BenchmarkSpec,
    RunOutcome,
    Verdict,
    capture_reference,
    compile_and_run,
    load_benchmarks,
    outputs_match,
)
from hpcforge.harness.scale import scale_test
from hpcforge.metrics.confusion import ConfusionCounts, Outcome
from hpcforge.metrics.speedup import SpeedupBucket
from hpcforge.ompdata.dataset import loops_in_file
from hpcforge.parsing.sites import for_loops
from hpcforge.parsing.source import Language, parse_source
from hpcforge.utils.config_manager import HarnessConfig

PLAIN = "void f(int n, double *a) {\n  int i;\n  for (i = 0; i < n; i++)\n    a[i] = 0;\n}\n"


def first_loop_span(code: str):
    return for_loops(parse_source(code, Language.C))[0].span


@pytest.fixture
def bench_file(tmp_path, annotated_source):
    path = tmp_path / "bench" / "kernels.c"
    path.parent.mkdir()
    path.write_text(annotated_source)
    return path


@pytest.fixture
def bench(bench_file):
    return BenchmarkSpec(name="kernels", sources=[bench_file], expected_output="ok\n")


@pytest.fixture
def samples(bench_file):
    loops = loops_in_file(RawFile(bench_file, bench_file.read_bytes(), Language.C))
    return loops.positives + loops.negatives


def offline_model(tmp_path, records) -> OfflineModel:
    path = tmp_path / "predictions.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return OfflineModel(path)


def completed(cmd, returncode=0, stdout="", stderr=""):
    return subprocess.CompletedProcess(cmd, returncode, stdout, stderr)


class TestInjectPragma:
    """Test inject_pragma."""

    def test_insert_with_indentation(self):
        """Test the pragma lands above the loop with its indentation."""
        patched = inject_pragma(PLAIN, first_loop_span(PLAIN), "#pragma omp parallel for")
        assert patched == PLAIN.replace("  for", "  #pragma omp parallel for\n  for")

    def test_replaces_existing_pragma(self):
        """Test pragmas already on the loop are removed."""
        original = PLAIN.replace("  for", "  #pragma omp parallel for private(i)\n  for")
        patched = inject_pragma(original, first_loop_span(original), "#pragma omp parallel for simd")
        assert patched == PLAIN.replace("  for", "  #pragma omp parallel for simd\n  for")

    def test_stacked_lines(self):
        """Test multi-line pragma text is injected line by line."""
        patched = inject_pragma(PLAIN.encode(), first_loop_span(PLAIN), "#pragma omp parallel\n#pragma omp for")
        assert isinstance(patched, bytes)
        assert b"  #pragma omp parallel\n  #pragma omp for\n  for" in patched

    def test_loop_sharing_a_line(self):
        """Test a loop after other code on its line gets a line break first."""
        code = "void f(int n, int *a) { int i; for (i = 0; i < n; i++) a[i] = 0; }\n"
        patched = inject_pragma(code, first_loop_span(code), "#pragma omp parallel for")
        assert "int i; \n#pragma omp parallel for\nfor (i = 0;" in patched

    def test_span_drift(self):
        """Test a span that is not a loop is rejected."""
        with pytest.raises(SpanDrift):
            inject_pragma(PLAIN, (0, 4), "#pragma omp parallel for")

    def test_bad_pragma(self):
        """Test pragma text must parse."""
        with pytest.raises(PragmaSyntaxError):
            inject_pragma(PLAIN, first_loop_span(PLAIN), "#pragma omp frobnicate")

    def test_replayed_stacked_pragma_is_merged(self):
        """Test a stacked parallel and for pair is replayed and injected as one merged line."""
        original = PLAIN.replace("  for", "  #pragma omp parallel\n  #pragma omp for\n  for")
        (sample,) = loops_in_file(RawFile(Path("f.c"), original.encode(), Language.C)).positives
        assert "\n" in sample.source_pragma.strip()
        pragma = predict(ReplayModel(), sample).pragma
        assert pragma == "#pragma omp parallel for"
        restored = inject_pragma(original, first_loop_span(original), pragma)
        assert restored == PLAIN.replace("  for", "  #pragma omp parallel for\n  for")
        assert restored != original


class TestAccuracyTest:
    """Test accuracy_test and reclassification."""

    def test_replay_is_perfect(self, samples):
        """Test the replay model scores every sample correctly."""
        report = accuracy_test(samples, ReplayModel(), system={"cpu_count": 4})
        assert report.counts == ConfusionCounts(tp=2, fp=0, tn=1, fn=0)
        assert report.counts.summary() == "100% 100% 100%"
        assert report.model == "builtin:replay"
        assert report.system == {"cpu_count": 4}
        assert [r.sample_id for r in report.samples] == [s.id for s in samples]

    def test_failures_count_as_negative(self, tmp_path, samples):
        """Test samples the model fails on are predicted negative and keep the error."""
        model = offline_model(tmp_path, [{"id": samples[0].id, "pragma": "#pragma omp critical"}])
        report = accuracy_test(samples, model, max_in_flight=2)
        assert report.counts == ConfusionCounts(tp=0, fp=0, tn=1, fn=2)
        assert len(report.failures) == 3
        assert "critical" in report.samples[0].error

    def test_empty_dataset(self):
        """Test an empty dataset is rejected."""
        with pytest.raises(ValueError):
            accuracy_test([], ReplayModel())

    def test_reclassify_fp(self, tmp_path, samples):
        """Test passing false positives become true positives."""
        negative = samples[-1]
        model = offline_model(tmp_path, [
            {"id": samples[0].id, "pragma": samples[0].label.render()},
            {"id": samples[1].id, "pragma": samples[1].label.render()},
            {"id": negative.id, "pragma": "#pragma omp parallel for"},
        ])
        report = accuracy_test(samples, model)
        assert report.counts == ConfusionCounts(tp=2, fp=1, tn=0, fn=0)
        adjusted = reclassify_fp(report, {negative.id: True})
        assert adjusted.counts == ConfusionCounts(tp=3, fp=0, tn=0, fn=0)
        assert adjusted.samples[-1].reclassified
        assert reclassify_fp(report, {negative.id: False}).counts == report.counts
        with pytest.raises(MissingVerdict):
            reclassify_fp(report, {})

    def test_reclassify_counts(self):
        """Test count-level reclassification of passing false positives."""
        counts = reclassify_counts(ConfusionCounts(311, 127, 262, 70), 96)
        assert counts == ConfusionCounts(407, 31, 262, 70)
        assert counts.summary() == "92% 85% 86%"
        with pytest.raises(ValueError):
            reclassify_counts(counts, 32)

    def test_report_round_trip(self, samples):
        """Test reports restore from their JSON form."""
        report = accuracy_test(samples, ReplayModel())
        data = json.loads(json.dumps(report.to_dict()))
        assert data["kind"] == "confusion_report"
        restored = ConfusionReport.from_dict(data)
        assert restored.counts == report.counts
        assert [s.outcome for s in restored.samples] == [Outcome.TP, Outcome.TP, Outcome.TN]


class TestRunner:
    """Test compile_and_run with subprocess mocked."""

    @pytest.fixture(autouse=True)
    def gcc_on_path(self):
        with patch("hpcforge.harness.runner.shutil.which", return_value="/usr/bin/gcc"):
            yield

    def test_pass(self, bench):
        """Test a build and three matching runs pass with the median time."""
        calls = []

        def run(cmd, **kwargs):
            calls.append((cmd, kwargs))
            return completed(cmd, stdout="" if cmd[0] == "gcc" else "ok\n")

        with patch("hpcforge.harness.runner.subprocess.run", side_effect=run):
            outcome = compile_and_run(bench, threads=4)
        assert outcome.verdict is Verdict.PASS
        assert outcome.wall_time_s is not None
        assert len(calls) == 4
        build_cmd = calls[0][0]
        assert build_cmd[:3] == ["gcc", "-fopenmp", "-O2"]
        assert build_cmd[-1] == "-lm"
        assert all(kwargs["env"]["OMP_NUM_THREADS"] == "4" for _, kwargs in calls[1:])

    def test_patched_sources_are_built(self, bench):
        """Test replacement file contents are written before the build."""
        built = []

        def run(cmd, **kwargs):
            if cmd[0] == "gcc":
                built.append((Path(kwargs["cwd"]) / "kernels.c").read_text())
            return completed(cmd, stdout="ok\n")

        with patch("hpcforge.harness.runner.subprocess.run", side_effect=run):
            compile_and_run(bench, {"kernels.c": "int main(void) { return 0; }\n"})
        assert built == ["int main(void) { return 0; }\n"]

    def test_default_threads_unsets_variable(self, bench):
        """Test a ``None`` thread count removes OMP_NUM_THREADS."""
        envs = []

        def run(cmd, **kwargs):
            if "env" in kwargs:
                envs.append(kwargs["env"])
            return completed(cmd, stdout="ok\n")

        with patch.dict(os.environ, {"OMP_NUM_THREADS": "64"}):
            with patch("hpcforge.harness.runner.subprocess.run", side_effect=run):
                compile_and_run(bench, threads=None, config=HarnessConfig(repeats=1))
        assert envs and "OMP_NUM_THREADS" not in envs[0]

    @pytest.mark.parametrize("build_rc, run_rc, stdout, verdict", [
        (1, 0, "ok\n", Verdict.COMPILE_FAIL),
        (0, 139, "ok\n", Verdict.RUN_FAIL),
        (0, 0, "nope\n", Verdict.OUTPUT_MISMATCH),
    ])
    def test_failure_verdicts(self, bench, build_rc, run_rc, stdout, verdict):
        """Test build failures, crashes and wrong output."""
        def run(cmd, **kwargs):
            if cmd[0] == "gcc":
                return completed(cmd, build_rc, stderr="error: boom")
            return completed(cmd, run_rc, stdout=stdout)

        with patch("hpcforge.harness.runner.subprocess.run", side_effect=run):
            outcome = compile_and_run(bench)
        assert outcome.verdict is verdict
        assert (outcome.wall_time_s is not None) == (verdict is Verdict.OUTPUT_MISMATCH)

    def test_timeout(self, bench):
        """Test a run past the time limit."""
        def run(cmd, **kwargs):
            if cmd[0] == "gcc":
                return completed(cmd)
            raise subprocess.TimeoutExpired(cmd, kwargs["timeout"])

        with patch("hpcforge.harness.runner.subprocess.run", side_effect=run):
            outcome = compile_and_run(bench)
        assert outcome.verdict is Verdict.TIMEOUT
        assert outcome.wall_time_s is None

    def test_toolchain_missing(self, bench):
        """Test an absent compiler is reported before building."""
        with patch("hpcforge.harness.runner.shutil.which", return_value=None):
            with pytest.raises(ToolchainMissing):
                compile_and_run(bench)

    def test_capture_reference(self, bench, tmp_path):
        """Test the unmodified program's output becomes the reference."""
        def run(cmd, **kwargs):
            return completed(cmd, stdout="42\n")

        with patch("hpcforge.harness.runner.subprocess.run", side_effect=run):
            captured = capture_reference(bench.model_copy(update={"expected_output": None}))
            written = capture_reference(bench, tmp_path / "kernels.expected")
        assert captured.expected() == "42\n"
        assert written.expected_file == tmp_path / "kernels.expected"
        assert written.expected() == "42\n"


class TestBenchmarkSpec:
    """Test benchmark specs and output comparison."""

    def test_templates_need_placeholders(self, bench_file):
        """Test build and run templates must name the source and binary."""
        with pytest.raises(ValidationError):
            BenchmarkSpec(name="x", sources=[bench_file], build="gcc -o {bin}")
        with pytest.raises(ValidationError):
            BenchmarkSpec(name="x", sources=[])

    def test_load_resolves_paths(self, tmp_path):
        """Test relative paths are resolved against the benchmark file."""
        (tmp_path / "suite.json").write_text(json.dumps({"benchmarks": [
            {"name": "a", "sources": ["a.c"], "expected_file": "a.expected"},
        ]}))
        (specs,) = load_benchmarks(tmp_path / "suite.json")
        assert specs.sources == [tmp_path / "a.c"]
        assert specs.expected_file == tmp_path / "a.expected"

    def test_load_errors(self, tmp_path):
        """Test unreadable and invalid files raise ConfigError."""
        with pytest.raises(ConfigError):
            load_benchmarks(tmp_path / "absent.json")
        (tmp_path / "bad.json").write_text(json.dumps([{"name": "a", "sources": ["a.c"], "colour": "red"}]))
        with pytest.raises(ConfigError):
            load_benchmarks(tmp_path / "bad.json")

    def test_outputs_match(self):
        """Test exact and numeric comparison."""
        assert outputs_match("pi = 3.14159\n", "pi = 3.14159\n")
        assert not outputs_match("pi = 3.1415900001\n", "pi = 3.14159\n")
        assert outputs_match("pi = 3.1415900001\n", "pi = 3.14159\n", "numeric", 1e-6)
        assert not outputs_match("pi = 3.2\n", "pi = 3.14159\n", "numeric", 1e-6)
        assert not outputs_match("tau = 3.14159\n", "pi = 3.14159\n", "numeric")
        assert not outputs_match("1\n2\n", "1\n", "numeric")


class TestScaleTest:
    """Test scale_test with the runner mocked."""

    @staticmethod
    def fake_run(failing=()):
        def run(bench, sources, threads, config, toolchain):
            if bench.name in failing:
                return RunOutcome(bench.name, Verdict.RUN_FAIL, threads, diagnostics="crash")
            return RunOutcome(bench.name, Verdict.PASS, threads, 4.0 / (threads or 1))
        return run

    def specs(self, bench_file, names):
        return [BenchmarkSpec(name=name, sources=[bench_file]) for name in names]

    def test_speedups_and_histograms(self, bench_file):
        """Test speedups over the baseline and per-thread histograms."""
        with patch("hpcforge.harness.scale.compile_and_run", side_effect=self.fake_run()), \
                patch("hpcforge.harness.scale.get_system_info", return_value={}):
            report = scale_test(self.specs(bench_file, ["a", "b"]), [1, 4, 16])
        assert report.benchmarks[0].speedup(4) == pytest.approx(4.0)
        assert report.benchmarks[0].bucket(16) is SpeedupBucket.IMP_GT10
        histograms = report.histograms()
        assert histograms[1][SpeedupBucket.IMP_1_2] == 2
        assert histograms[4][SpeedupBucket.IMP_2_5] == 2
        assert all(sum(h.values()) == 2 for h in histograms.values())
        frame = report.histogram_frame()
        assert list(frame.index) == [1, 4, 16]
        assert frame.sum(axis=1).tolist() == [2, 2, 2]
        assert report.to_frame().loc["b", 16] == pytest.approx(16.0)

    def test_failures_have_no_speedup(self, bench_file):
        """Test a failing benchmark is recorded and left out of the histograms."""
        with patch("hpcforge.harness.scale.compile_and_run", side_effect=self.fake_run({"b"})), \
                patch("hpcforge.harness.scale.get_system_info", return_value={}):
            report = scale_test(self.specs(bench_file, ["a", "b"]), [2])
        assert report.benchmarks[1].speedup(2) is None
        assert sum(report.histograms()[2].values()) == 1
        data = report.to_dict()
        assert data["benchmarks"][1]["runs"]["2"]["verdict"] == "RunFail"
        assert data["benchmarks"][1]["runs"]["2"]["bucket"] is None

    def test_threads1_baseline(self, bench_file):
        """Test the one-thread baseline mode."""
        seen = []

        def run(bench, sources, threads, config, toolchain):
            seen.append(threads)
            return RunOutcome(bench.name, Verdict.PASS, threads, 1.0)

        with patch("hpcforge.harness.scale.compile_and_run", side_effect=run), \
                patch("hpcforge.harness.scale.get_system_info", return_value={}):
            report = scale_test(self.specs(bench_file, ["a"]), [8], config=HarnessConfig(baseline="threads1"))
        assert seen == [1, 8]
        assert report.baseline == "threads1"

    def test_non_positive_threads(self, bench_file):
        """Test thread counts must be positive."""
        with patch("hpcforge.harness.scale.get_system_info", return_value={}):
            with pytest.raises(ValueError):
                scale_test(self.specs(bench_file, ["a"]), [0])


class TestEndToEnd:
    """Test evaluate_end_to_end with the runner mocked and real injection."""

    def model(self, tmp_path, samples):
        return offline_model(tmp_path, [
            {"id": samples[0].id, "pragma": samples[0].label.render()},
            {"id": samples[1].id, "pragma": None},
            {"id": samples[2].id, "pragma": "#pragma omp parallel for"},
        ])

    def test_passing_false_positive_reclassified(self, tmp_path, bench, samples):
        """Test a false positive whose injected pragma passes everywhere becomes a true positive."""
        patched = []

        def run(bench, sources, threads, config, toolchain):
            patched.append(sources["kernels.c"])
            return RunOutcome(bench.name, Verdict.PASS, threads, 0.1)

        with patch("hpcforge.harness.pipeline.compile_and_run", side_effect=run), \
                patch("hpcforge.harness.pipeline.get_system_info", return_value={"cc": "gcc"}):
            report = evaluate_end_to_end([bench], samples, self.model(tmp_path, samples), threads=[1, 4])
        assert report.accuracy.counts == ConfusionCounts(tp=1, fp=1, tn=0, fn=1)
        assert report.adjusted.counts == ConfusionCounts(tp=2, fp=0, tn=0, fn=1)
        assert len(patched) == 4
        assert ("    #pragma omp parallel for\n    for (i = 0; i < n; i++) {\n        a[i] = a[i] + 1.0;"
                in patched[-1])
        table = compile_run_table(report.all_outcomes())
        assert table.loc[4, "Pass"] == 2
        assert table.loc[1, "CompileFail"] == 0
        data = report.to_dict()
        assert data["kind"] == "end_to_end"
        assert data["compile_run"]["1"]["Pass"] == 2

    def test_failing_false_positive_kept(self, tmp_path, bench, samples):
        """Test a false positive that fails at any thread count stays false."""
        def run(bench, sources, threads, config, toolchain):
            if threads == 4:
                return RunOutcome(bench.name, Verdict.OUTPUT_MISMATCH, threads, 0.1)
            return RunOutcome(bench.name, Verdict.PASS, threads, 0.1)

        with patch("hpcforge.harness.pipeline.compile_and_run", side_effect=run), \
                patch("hpcforge.harness.pipeline.get_system_info", return_value={}):
            report = evaluate_end_to_end([bench], samples, self.model(tmp_path, samples), threads=[1, 4])
        assert report.adjusted.counts == report.accuracy.counts
        summary = benchmark_summary(report.all_outcomes())
        assert summary.loc["kernels"].tolist() == [2, 2]

    def test_loops_outside_benchmarks(self, tmp_path, samples):
        """Test predictions that cannot be located are not run."""
        with patch("hpcforge.harness.pipeline.compile_and_run") as run, \
                patch("hpcforge.harness.pipeline.get_system_info", return_value={}):
            report = evaluate_end_to_end([], samples, self.model(tmp_path, samples), threads=[1])
        run.assert_not_called()
        assert report.adjusted.counts == report.accuracy.counts
        assert report.outcomes == {}
