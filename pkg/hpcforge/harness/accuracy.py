"""Accuracy test: predictions against ground-truth labels."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

from ..errors import EndpointUnreachable, InvalidGeneration, MissingVerdict
from ..metrics.confusion import ConfusionCounts, Outcome, aggregate_confusion, outcome_for
from ..ompdata.dataset import LoopSample
from .models.base import ModelEndpoint
from .prediction import ModelPrediction, predict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleResult:
    """Verdict for one sample; ``error`` is set when the model failed on it."""

    sample_id: str
    labelled: bool
    outcome: Outcome
    prediction: Optional[ModelPrediction] = None
    error: Optional[str] = None
    reclassified: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.sample_id,
            "labelled": self.labelled,
            "outcome": self.outcome.value,
            "prediction": self.prediction.to_dict() if self.prediction else None,
            "error": self.error,
            "reclassified": self.reclassified,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleResult":
        prediction = data.get("prediction")
        return cls(
            sample_id=data["id"],
            labelled=bool(data["labelled"]),
            outcome=Outcome(data["outcome"]),
            prediction=ModelPrediction(**prediction) if prediction else None,
            error=data.get("error"),
            reclassified=bool(data.get("reclassified", False)),
        )


@dataclass(frozen=True)
class ConfusionReport:
    """Confusion counts plus the per-sample results they were summed from."""

    counts: ConfusionCounts
    samples: List[SampleResult] = field(default_factory=list)
    model: str = ""
    system: Dict[str, object] = field(default_factory=dict)

    @property
    def failures(self) -> List[SampleResult]:
        return [s for s in self.samples if s.error]

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "kind": "confusion_report",
            "model": self.model,
            "counts": self.counts.to_dict(),
            "summary": self.counts.summary(),
            "samples": [s.to_dict() for s in self.samples],
            "system": self.system,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConfusionReport":
        return cls(
            counts=ConfusionCounts.from_dict(data["counts"]),
            samples=[SampleResult.from_dict(s) for s in data.get("samples", [])],
            model=data.get("model", ""),
            system=data.get("system", {}),
        )


def _evaluate(model: ModelEndpoint, sample: LoopSample) -> SampleResult:
    labelled = sample.label is not None
    try:
        prediction = predict(model, sample)
    except (EndpointUnreachable, InvalidGeneration) as e:
        logger.warning(f"sample {sample.id}: {e}")
        return SampleResult(sample.id, labelled, outcome_for(False, labelled), None, str(e))
    return SampleResult(sample.id, labelled, outcome_for(prediction.parallelizable, labelled), prediction)


def accuracy_test(dataset: Sequence[LoopSample], model: ModelEndpoint, max_in_flight: int = 1,
                  system: Optional[Dict[str, object]] = None) -> ConfusionReport:
    """Compare the model's pragma (or lack of one) with each sample's label.

    A sample the model fails on counts as "no pragma predicted" and keeps the
    error text. Requests run with at most ``max_in_flight`` in flight; results
    stay in dataset order.

    Args:
        dataset: Labelled positives and unlabelled negatives
        model: Model endpoint; connected for the duration of the test
        max_in_flight: Concurrent model requests
        system: Machine description recorded in the report

    Returns:
        ConfusionReport with per-sample results

    Raises:
        ValueError: If the dataset is empty
    """
    if not dataset:
        raise ValueError("accuracy test needs at least one sample")
    with model:
        if max_in_flight > 1:
            with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
                results = list(pool.map(lambda s: _evaluate(model, s), dataset))
        else:
            results = [_evaluate(model, sample) for sample in dataset]
    counts = aggregate_confusion(r.outcome for r in results)
    logger.info(f"{model.name}: {counts.summary()} (precision recall accuracy) over {len(results)} samples")
    return ConfusionReport(counts, results, model.name, dict(system or {}))


def reclassify_fp(report: ConfusionReport, verdicts: Dict[str, bool]) -> ConfusionReport:
    """Turn false positives whose injected pragma compiled, ran and passed into true positives.

    Args:
        report: Accuracy-test report
        verdicts: Sample id to "compile-and-run passed" for every false positive

    Returns:
        A new report with recomputed counts

    Raises:
        MissingVerdict: If a false positive has no verdict
    """
    samples = []
    for result in report.samples:
        if result.outcome is Outcome.FP:
            if result.sample_id not in verdicts:
                raise MissingVerdict(f"no compile-and-run verdict for false positive {result.sample_id}")
            if verdicts[result.sample_id]:
                result = replace(result, outcome=Outcome.TP, reclassified=True)
        samples.append(result)
    counts = aggregate_confusion(r.outcome for r in samples)
    moved = counts.tp - report.counts.tp
    logger.info(f"reclassified {moved} false positives as true positives")
    return replace(report, counts=counts, samples=samples)


def reclassify_counts(counts: ConfusionCounts, fp_passes: int) -> ConfusionCounts:
    """Count-level reclassification for when only the totals are known."""
    if not 0 <= fp_passes <= counts.fp:
        raise ValueError(f"fp_passes must be between 0 and {counts.fp}, got {fp_passes}")
    return ConfusionCounts(counts.tp + fp_passes, counts.fp - fp_passes, counts.tn, counts.fn)
