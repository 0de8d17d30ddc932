"""Corpus curation."""

from .builder import CorpusStats, LanguageStats, build_corpus, read_records, read_stats, write_records
from .completion import CUTS, CompletionPair, completion_pairs, truncate_prefix
from .ingest import Deduplicator, RawFile, dedup, filter_size, ingest

__all__ = [
    "CUTS",
    "CompletionPair",
    "CorpusStats",
    "Deduplicator",
    "LanguageStats",
    "RawFile",
    "build_corpus",
    "completion_pairs",
    "dedup",
    "filter_size",
    "ingest",
    "read_records",
    "read_stats",
    "truncate_prefix",
    "write_records",
]
