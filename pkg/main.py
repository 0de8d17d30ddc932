#!/usr/bin/env python3
"""Example usage of the HPCForge package on the bundled benchmark suite."""

import re
from pathlib import Path

from hpcforge import HpcForge, HpcForgeError, codebleu
from hpcforge.harness.models import ReplayModel
from hpcforge.harness.runner import capture_reference, load_benchmarks
from hpcforge.harness.pipeline import evaluate_end_to_end
from hpcforge.metrics.confusion import format_rate
from hpcforge.utils.system_info import has_openmp_toolchain

BENCH_DIR = Path(__file__).parent / "tests" / "fixtures" / "bench"


def main():
    """Demonstrate HPCForge usage."""
    print("HPCForge - corpora, loop datasets and model evaluation for HPC code")
    print("=" * 60)

    forge = HpcForge(overrides={"seed": 7, "ompdata": {"balance": False}})

    # Example 1: Anonymization
    print("\n1. Anonymized functions:")
    units = forge.tokompile(BENCH_DIR / "dot.c")
    for unit in units:
        print(f"  {unit.origin.name} -> {unit.code.decode().splitlines()[0]}")
        print(f"  renamed: {unit.map.to_dict()['entries']}")

    # Example 2: Loop dataset
    print("\n2. OpenMP loop dataset:")
    samples = forge.extract_loops(BENCH_DIR)
    positives = [s for s in samples if s.is_positive]
    print(f"  {len(positives)} annotated loops, {len(samples) - len(positives)} plain loops")
    for sample in positives[:3]:
        print(f"  {sample.label.render()}")

    # Example 3: Accuracy of the built-in models
    print("\n3. Accuracy test:")
    for model in ("builtin:replay", "builtin:heuristic"):
        counts = forge.accuracy(samples, model).counts
        print(f"  {model:<18} precision {format_rate(counts.precision)}  recall {format_rate(counts.recall)}"
              f"  accuracy {format_rate(counts.accuracy)}")

    # Example 4: CodeBLEU of a loop with its index renamed
    print("\n4. CodeBLEU:")
    reference = positives[0].loop_code
    renamed = re.sub(r"\bi\b", "k", reference)
    score = codebleu(renamed, reference, forge.config.language)
    print(f"  renamed loop index: combined {score.combined:.3f}, dataflow {score.dataflow_match}")

    # Example 5: End-to-end compile-and-run check
    print("\n5. Compile and run:")
    if not has_openmp_toolchain(forge.config.toolchain.cc):
        print(f"  ✗ {forge.config.toolchain.cc} with {forge.config.toolchain.openmp_flag} not available; skipped")
        return
    try:
        single = forge.config.harness.model_copy(update={"repeats": 1})
        suite = [capture_reference(b, config=single) for b in load_benchmarks(BENCH_DIR / "bench.json")]
        report = evaluate_end_to_end(suite, samples, ReplayModel(), threads=[1, 4], config=single)
        print(f"  ✓ {report.accuracy.counts.summary()} -> {report.adjusted.counts.summary()}")
    except HpcForgeError as e:
        print(f"  ✗ End-to-end test failed: {e}")


if __name__ == "__main__":
    main()
