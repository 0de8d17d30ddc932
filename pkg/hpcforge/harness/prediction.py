"""Two-stage model prediction for one loop."""

import logging
import time
from dataclasses import dataclass
from typing import Optional

from ..errors import InvalidGeneration, PragmaSyntaxError, Unnormalizable
from ..ompdata.dataset import LoopSample
from ..ompdata.normalize import NormalizedPragma, parse_normalized
from .models.base import ModelEndpoint

logger = logging.getLogger(__name__)

GPT_PRAGMA_PROMPT = "Generate the optimal OpenMP pragma for the provided code"


@dataclass(frozen=True)
class ModelPrediction:
    """Classification and, for positives, the generated pragma text."""

    parallelizable: bool
    score: float
    pragma: Optional[str] = None
    latency_ms: float = 0.0

    def __post_init__(self):
        if self.parallelizable != (self.pragma is not None):
            raise ValueError("a pragma is present exactly when the loop is parallelizable")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")

    @property
    def normalized(self) -> Optional[NormalizedPragma]:
        return parse_normalized(self.pragma) if self.pragma is not None else None

    def to_dict(self) -> dict:
        return {"parallelizable": self.parallelizable, "score": self.score,
                "pragma": self.pragma, "latency_ms": self.latency_ms}


def predict(model: ModelEndpoint, sample: LoopSample) -> ModelPrediction:
    """Classify a loop and generate its pragma when positive.

    Args:
        model: Connected model endpoint
        sample: Loop to predict

    Returns:
        Validated ModelPrediction

    Raises:
        EndpointUnreachable: If the model cannot be reached after retries
        InvalidGeneration: If the generated pragma is not a supported loop pragma
    """
    start = time.perf_counter()
    parallelizable, score = model.classify(sample)
    pragma = None
    if parallelizable:
        pragma = model.generate(sample).strip()
        try:
            parse_normalized(pragma)
        except (PragmaSyntaxError, Unnormalizable) as e:
            raise InvalidGeneration(f"{model.name} generated {pragma!r} for {sample.id}: {e}")
    latency_ms = (time.perf_counter() - start) * 1000.0
    return ModelPrediction(parallelizable, min(1.0, max(0.0, float(score))), pragma, latency_ms)
