"""CodeBLEU tables for prefix-completion evaluation."""

import logging
from typing import Optional, Sequence

import pandas as pd

from ..corpus.completion import CompletionPair
from ..errors import TokenizeFailure
from ..parsing.source import Language
from ..utils.config_manager import MetricsConfig
from .codebleu import codebleu

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ["ngram", "weighted_ngram", "ast_match", "dataflow_match", "combined"]


def score_completions(pairs: Sequence[CompletionPair], completions: Sequence[str],
                      language: Language = Language.C, config: Optional[MetricsConfig] = None) -> pd.DataFrame:
    """Mean CodeBLEU components per prefix cut.

    Each completion is scored against its pair's suffix. An empty completion
    scores zero on every component.

    Args:
        pairs: Prompt/reference pairs
        completions: Model output per pair, aligned with ``pairs``
        language: Grammar and keyword set
        config: CodeBLEU weights and constants; package defaults when omitted

    Returns:
        DataFrame indexed by cut with one column per component and a ``count`` column
    """
    if len(pairs) != len(completions):
        raise ValueError(f"{len(completions)} completions for {len(pairs)} pairs")
    config = config or MetricsConfig()
    rows = []
    for pair, completion in zip(pairs, completions):
        try:
            score = codebleu(completion, pair.reference, language, config.weights, config.max_n,
                             config.keyword_weight, config.ast_depth).to_dict()
        except TokenizeFailure as e:
            logger.warning(f"scoring {pair.origin} at cut {pair.cut} as zero: {e}")
            score = dict.fromkeys(SCORE_COLUMNS, 0.0)
        rows.append({"cut": pair.cut, **score})
    if not rows:
        return pd.DataFrame(columns=SCORE_COLUMNS + ["count"]).rename_axis("cut")
    frame = pd.DataFrame(rows).astype({c: float for c in SCORE_COLUMNS})
    table = frame.groupby("cut")[SCORE_COLUMNS].mean()
    table["count"] = frame.groupby("cut").size()
    return table
