"""Perplexity from per-token log probabilities."""

import math
from typing import Sequence

import numpy as np

from ..errors import EmptySequence, InvalidLogProb

# exp(-mean) is reported to this many significant digits, which absorbs the
# rounding of exp(log(V)) so a uniform model over V tokens scores exactly V.
SIGNIFICANT_DIGITS = 13


def perplexity(logprobs: Sequence[float]) -> float:
    """``exp(-mean(logprobs))`` for natural-log token probabilities.

    Raises:
        EmptySequence: If ``logprobs`` is empty
        InvalidLogProb: If any value is positive or NaN
    """
    values = np.asarray(logprobs, dtype=float)
    if values.size == 0:
        raise EmptySequence("perplexity needs at least one token log probability")
    if np.any(np.isnan(values)):
        raise InvalidLogProb("log probabilities must be numbers, got NaN")
    if np.any(values > 0):
        raise InvalidLogProb(f"log probabilities must be <= 0, got max {values.max()}")
    value = math.exp(-math.fsum(values.tolist()) / values.size)
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
