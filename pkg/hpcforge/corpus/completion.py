"""Prefix/suffix pairs for code-completion evaluation."""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from ..errors import TooShort
from ..parsing.source import Language
from ..tokompiler.lexer import join_tokens, tokenize_source

logger = logging.getLogger(__name__)

CUTS = (100, 300, 600)


@dataclass(frozen=True)
class CompletionPair:
    """Model prompt (prefix) and CodeBLEU reference (suffix) cut from one function."""

    prefix_tokens: List[str]
    suffix_tokens: List[str]
    cut: int
    origin: str = ""

    @property
    def prompt(self) -> str:
        return join_tokens(self.prefix_tokens)

    @property
    def reference(self) -> str:
        return join_tokens(self.suffix_tokens)


def truncate_prefix(tokens: Sequence[str], cut: int, origin: str = "") -> CompletionPair:
    """Split a token stream after its first ``cut`` tokens.

    Raises:
        TooShort: If the stream has ``cut`` tokens or fewer
    """
    if cut <= 0:
        raise ValueError(f"cut must be positive, got {cut}")
    if len(tokens) <= cut:
        raise TooShort(f"{len(tokens)} tokens cannot be cut after {cut}")
    return CompletionPair(list(tokens[:cut]), list(tokens[cut:]), cut, origin)


def record_tokens(record: dict) -> List[str]:
    """Tokens of a corpus record, recomputed from its code when not stored."""
    if record.get("tokens") is not None:
        return list(record["tokens"])
    return tokenize_source(record["code"], Language(record["lang"]))


def completion_pairs(records: Iterable[dict], cuts: Sequence[int] = CUTS) -> List[CompletionPair]:
    """Pairs for every record long enough for each cut, ordered by record then cut."""
    pairs = []
    for record in records:
        tokens = record_tokens(record)
        origin = f"{record.get('file_id', '')}:{record.get('name', '')}"
        for cut in cuts:
            try:
                pairs.append(truncate_prefix(tokens, cut, origin))
            except TooShort:
                logger.debug(f"{origin} has {len(tokens)} tokens, too short for cut {cut}")
    return pairs
