"""Corpus build pipeline and statistics."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Union

import jsonlines
import pandas as pd
from tqdm import tqdm

from ..errors import DecodeError, ReparseFailure, SuffixExhaustion
from ..parsing.functions import FunctionUnit, extract_functions
from ..parsing.source import Language, parse_source, render_canonical
from ..tokompiler.anonymizer import anonymize, derive_seed
from ..tokompiler.lexer import count_tokens, lexicalize, tokenize_source
from ..utils.config_manager import CorpusConfig, GlobalConfig, TokompilerConfig
from .ingest import Deduplicator, RawFile, filter_size, ingest

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LanguageStats:
    """Counts for one language; repository names are kept so merges stay exact."""

    repo_names: FrozenSet[str] = frozenset()
    size_bytes: int = 0
    file_count: int = 0
    function_count: int = 0

    @property
    def repos(self) -> int:
        return len(self.repo_names)

    def __add__(self, other: "LanguageStats") -> "LanguageStats":
        return LanguageStats(
            repo_names=self.repo_names | other.repo_names,
            size_bytes=self.size_bytes + other.size_bytes,
            file_count=self.file_count + other.file_count,
            function_count=self.function_count + other.function_count,
        )


@dataclass(frozen=True)
class CorpusStats:
    """Per-language corpus statistics.

    ``file_count`` counts files after deduplication; ``function_count`` counts
    emitted function records.
    """

    languages: Dict[Language, LanguageStats] = field(default_factory=dict)
    duplicates_dropped: int = 0
    files_filtered: int = 0
    parse_failures: int = 0

    def __add__(self, other: "CorpusStats") -> "CorpusStats":
        merged = dict(self.languages)
        for language, stats in other.languages.items():
            merged[language] = merged.get(language, LanguageStats()) + stats
        return CorpusStats(
            languages=merged,
            duplicates_dropped=self.duplicates_dropped + other.duplicates_dropped,
            files_filtered=self.files_filtered + other.files_filtered,
            parse_failures=self.parse_failures + other.parse_failures,
        )

    @property
    def file_count(self) -> int:
        return sum(s.file_count for s in self.languages.values())

    @property
    def function_count(self) -> int:
        return sum(s.function_count for s in self.languages.values())

    @property
    def size_bytes(self) -> int:
        return sum(s.size_bytes for s in self.languages.values())

    @property
    def repos(self) -> int:
        names: FrozenSet[str] = frozenset()
        for stats in self.languages.values():
            names |= stats.repo_names
        return len(names)

    def to_frame(self) -> pd.DataFrame:
        """Table with one row per language plus a total row."""
        rows = [
            {"language": language.value, "repos": s.repos, "size_bytes": s.size_bytes,
             "files": s.file_count, "functions": s.function_count}
            for language, s in sorted(self.languages.items(), key=lambda item: item[0].value)
        ]
        rows.append({"language": "total", "repos": self.repos, "size_bytes": self.size_bytes,
                     "files": self.file_count, "functions": self.function_count})
        return pd.DataFrame(rows).set_index("language")

    def to_dict(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "kind": "corpus_stats",
            "languages": {
                language.value: {"repos": s.repos, "size_bytes": s.size_bytes,
                                 "files": s.file_count, "functions": s.function_count}
                for language, s in sorted(self.languages.items(), key=lambda item: item[0].value)
            },
            "duplicates_dropped": self.duplicates_dropped,
            "files_filtered": self.files_filtered,
            "parse_failures": self.parse_failures,
        }


@dataclass(frozen=True)
class _FileResult:
    records: List[dict]
    stats: CorpusStats


def _unit_record(unit: FunctionUnit, repo: str, code: bytes, tokens: Optional[List[str]]) -> dict:
    record = {
        "v": SCHEMA_VERSION,
        "file_id": unit.file_id,
        "lang": unit.language.value,
        "name": unit.name,
        "span": list(unit.byte_span),
        "repo": repo,
        "code": code.decode("utf-8", "replace"),
    }
    if tokens is not None:
        record["tokens"] = tokens
    return record


def process_file(raw: RawFile, corpus: CorpusConfig, tokompiler: TokompilerConfig, seed: int) -> _FileResult:
    """Filter, parse, extract and optionally anonymize one deduplicated file."""
    def filtered(reason: str) -> _FileResult:
        logger.debug(f"filtered {raw.path}: {reason}")
        return _FileResult([], CorpusStats(
            languages={raw.language: LanguageStats(frozenset({raw.repo}), raw.size_bytes, 1, 0)},
            files_filtered=1,
        ))

    if not corpus.per_function_filter and not filter_size(raw, corpus.min_tokens, corpus.max_bytes):
        return filtered("size")
    if corpus.per_function_filter and raw.size_bytes >= corpus.max_bytes:
        return filtered("bytes")
    try:
        tree = parse_source(raw.data, raw.language)
    except DecodeError as e:
        logger.warning(f"skipping undecodable file {raw.path}: {e}")
        return filtered("decode")
    if tree.error_count > corpus.max_parse_errors:
        logger.debug(f"skipping {raw.path}: {tree.error_count} parse errors")
        return _FileResult([], CorpusStats(
            languages={raw.language: LanguageStats(frozenset({raw.repo}), raw.size_bytes, 1, 0)},
            parse_failures=1,
        ))

    records = []
    for unit in extract_functions(tree, raw.content_hash):
        if corpus.per_function_filter and count_tokens(unit.source_text, unit.language) <= corpus.min_tokens:
            continue
        if corpus.anonymize:
            try:
                anon = anonymize(unit, derive_seed(seed, unit.file_id, unit.byte_span), tokompiler)
            except (ReparseFailure, SuffixExhaustion) as e:
                logger.warning(f"skipping function {unit.name!r} in {raw.path}: {e}")
                continue
            tokens = lexicalize(anon).tokens if corpus.emit_tokens else None
            record = _unit_record(unit, raw.repo, anon.code, tokens)
            record["map"] = anon.map.to_dict()
            record["seed"] = anon.seed
        else:
            canonical = parse_source(render_canonical(unit.parse()), unit.language)
            tokens = tokenize_source(canonical.source, unit.language, canonical) if corpus.emit_tokens else None
            record = _unit_record(unit, raw.repo, canonical.source, tokens)
        records.append(record)

    stats = CorpusStats(languages={
        raw.language: LanguageStats(frozenset({raw.repo}), raw.size_bytes, 1, len(records)),
    })
    return _FileResult(records, stats)


def _process_star(args) -> _FileResult:
    return process_file(*args)


def iter_file_results(files: List[RawFile], config: GlobalConfig, show_progress: bool = False) -> Iterator[_FileResult]:
    """Process files in order, in a process pool when ``config.jobs`` > 1."""
    work = [(raw, config.corpus, config.tokompiler, config.seed) for raw in files]
    if config.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = pool.map(_process_star, work, chunksize=max(1, len(work) // (config.jobs * 4)))
            yield from tqdm(results, total=len(work), desc="corpus", disable=not show_progress)
    else:
        yield from (process_file(*item) for item in tqdm(work, desc="corpus", disable=not show_progress))


def write_records(records: Iterable[dict], out: Union[Path, str]) -> int:
    """Write JSONL with sorted keys and compact separators; returns the record count."""
    count = 0
    with jsonlines.open(out, mode="w", sort_keys=True, compact=True) as writer:
        for record in records:
            writer.write(record)
            count += 1
    return count


def read_records(path: Union[Path, str]) -> Iterator[dict]:
    with jsonlines.open(path) as reader:
        yield from reader


def build_corpus(config: GlobalConfig, out: Union[Path, str], show_progress: bool = False) -> CorpusStats:
    """Run ingest, dedup, size filter, function extraction and optional anonymization.

    Args:
        config: Validated configuration; ``config.corpus.roots`` lists the inputs
        out: Output JSONL path
        show_progress: Show a progress bar on standard error

    Returns:
        Statistics whose function totals equal the emitted record count

    Raises:
        OSError: If the output cannot be written
    """
    deduplicator = Deduplicator()
    files = list(deduplicator.filter(ingest(config.corpus.roots, config.corpus.extensions)))
    logger.info(f"{len(files)} unique files, {deduplicator.dropped} duplicates dropped")

    stats = CorpusStats(duplicates_dropped=deduplicator.dropped)
    records: List[dict] = []
    for result in iter_file_results(files, config, show_progress):
        records.extend(result.records)
        stats = stats + result.stats
    written = write_records(records, out)
    logger.info(f"wrote {written} function records to {out}")
    return stats


def read_stats(path: Union[Path, str]) -> CorpusStats:
    """Recompute statistics from an emitted corpus file."""
    per_language: Dict[Language, Dict[str, set]] = {}
    counts: Dict[Language, List[int]] = {}
    for record in read_records(path):
        language = Language(record["lang"])
        seen = per_language.setdefault(language, {"repos": set(), "files": set()})
        seen["repos"].add(record.get("repo", ""))
        seen["files"].add(record["file_id"])
        size_and_functions = counts.setdefault(language, [0, 0])
        size_and_functions[0] += len(record["code"].encode("utf-8"))
        size_and_functions[1] += 1
    return CorpusStats(languages={
        language: LanguageStats(frozenset(seen["repos"]), counts[language][0],
                                len(seen["files"]), counts[language][1])
        for language, seen in per_language.items()
    })
