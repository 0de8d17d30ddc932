"""Loop/pragma dataset extraction, balancing and clause statistics."""

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

import jsonlines
import numpy as np
import pandas as pd
from tqdm import tqdm

from ..corpus.ingest import RawFile
from ..errors import DecodeError, InsufficientNegatives, SchemaMismatch, Unnormalizable
from ..parsing.sites import PragmaSite, for_loops, omp_pragma_nodes, removal_span, scan_pragmas
from ..parsing.source import Language, SyntaxNode, SyntaxTree, parse_source
from .normalize import NormalizedPragma, merge_stacked, normalize_pragma, parse_normalized

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
HISTOGRAM_COLUMNS = ["private", "reduction", "target", "simd", "plain", "total"]


class BenchmarkRef(NamedTuple):
    """Location of a loop in the file it was extracted from."""

    file_id: str
    loop_span: Tuple[int, int]


@dataclass(frozen=True)
class LoopSample:
    """One ``for`` loop without its surrounding context.

    ``label`` is the normalized pragma for positives and ``None`` for
    negatives. ``source_pragma`` keeps the pragma lines exactly as written so
    the harness can replay them.
    """

    id: str
    loop_code: str
    label: Optional[NormalizedPragma]
    language: Language
    benchmark_ref: Optional[BenchmarkRef] = None
    source_pragma: Optional[str] = None

    @property
    def is_positive(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class _FileLoops:
    positives: List[LoopSample]
    negatives: List[LoopSample]


def sample_id(file_id: str, span: Tuple[int, int]) -> str:
    return f"{file_id[:16]}:{span[0]}-{span[1]}"


def _loop_text(tree: SyntaxTree, loop: SyntaxNode, inner_pragmas: List[SyntaxNode]) -> str:
    """Loop source with any OpenMP pragma lines inside it removed."""
    source = tree.source
    out = bytearray()
    position = loop.start
    for node in inner_pragmas:
        if node.start < loop.start or node.end > loop.end:
            continue
        start, end = removal_span(source, node.span)
        start = max(start, loop.start)
        if start < position:
            continue
        out += source[position:start]
        position = min(end, loop.end)
    out += source[position:loop.end]
    return bytes(out).decode("utf-8", "replace")


def _label(sites: List[PragmaSite]) -> NormalizedPragma:
    label = normalize_pragma(sites[0].pragma)
    for site in sites[1:]:
        label = merge_stacked(label, normalize_pragma(site.pragma))
    return label


def loops_in_file(raw: RawFile) -> _FileLoops:
    """Split the ``for`` loops of one file into labelled positives and plain loops.

    Plain loops nested inside an annotated loop are not negatives. Loops whose
    pragma cannot be normalized are skipped entirely.
    """
    try:
        tree = parse_source(raw.data, raw.language)
    except DecodeError as e:
        logger.warning(f"skipping undecodable file {raw.path}: {e}")
        return _FileLoops([], [])
    file_id = raw.content_hash
    scan = scan_pragmas(tree, file_id)
    by_loop: Dict[Tuple[int, int], List[PragmaSite]] = {}
    for site in scan.sites:
        by_loop.setdefault(site.loop_span, []).append(site)
    pragma_nodes = omp_pragma_nodes(tree)

    positives: List[LoopSample] = []
    negatives: List[LoopSample] = []
    annotated: List[Tuple[int, int]] = []
    for loop in for_loops(tree):
        sites = by_loop.get(loop.span)
        inside_positive = any(start <= loop.start and loop.end <= end for start, end in annotated)
        if not sites and inside_positive:
            continue
        code = _loop_text(tree, loop, pragma_nodes)
        if not parse_source(code, raw.language).is_clean:
            logger.debug(f"skipping loop at {loop.span} in {raw.path}: does not parse on its own")
            continue
        ref = BenchmarkRef(file_id, loop.span)
        if not sites:
            negatives.append(LoopSample(sample_id(file_id, loop.span), code, None, raw.language, ref))
            continue
        annotated.append(loop.span)
        try:
            label = _label(sites)
        except Unnormalizable as e:
            logger.warning(f"skipping loop at {loop.span} in {raw.path}: {e}")
            continue
        source_pragma = "\n".join(site.pragma.raw_text for site in sites)
        positives.append(LoopSample(sample_id(file_id, loop.span), code, label, raw.language, ref, source_pragma))
    return _FileLoops(positives, negatives)


def _iter_file_loops(files: List[RawFile], jobs: int, show_progress: bool) -> Iterator[_FileLoops]:
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(loops_in_file, files, chunksize=max(1, len(files) // (jobs * 4)))
            yield from tqdm(results, total=len(files), desc="ompdata", disable=not show_progress)
    else:
        yield from (loops_in_file(raw) for raw in tqdm(files, desc="ompdata", disable=not show_progress))


def sample_negatives(negatives: List[LoopSample], count: int, seed: int) -> List[LoopSample]:
    """Seeded choice of ``count`` negatives, kept in their original order.

    Warns with :class:`InsufficientNegatives` and returns all of them when
    fewer than ``count`` exist.
    """
    if count >= len(negatives):
        if count > len(negatives):
            warnings.warn(InsufficientNegatives(
                f"requested {count} negative loops but only {len(negatives)} are available"
            ), stacklevel=2)
        return list(negatives)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(negatives), size=count, replace=False))
    return [negatives[i] for i in chosen]


def extract_dataset(files: Iterable[RawFile], balance: bool = True, neg_ratio: float = 1.0,
                    seed: int = 0, jobs: int = 1, show_progress: bool = False) -> List[LoopSample]:
    """Extract loop samples from source files.

    Args:
        files: Files to scan, usually the output of corpus ingest and dedup
        balance: Sample ``ceil(neg_ratio * positives)`` negatives instead of keeping all
        neg_ratio: Negatives per positive when balancing
        seed: Seed for negative sampling
        jobs: Worker processes for parsing
        show_progress: Show a progress bar on standard error

    Returns:
        Positives in document order followed by the chosen negatives in document order
    """
    files = list(files)
    positives: List[LoopSample] = []
    negatives: List[LoopSample] = []
    for result in _iter_file_loops(files, jobs, show_progress):
        positives.extend(result.positives)
        negatives.extend(result.negatives)
    logger.info(f"found {len(positives)} annotated and {len(negatives)} plain loops in {len(files)} files")
    if balance:
        negatives = sample_negatives(negatives, math.ceil(neg_ratio * len(positives)), seed)
    return positives + negatives


def sample_to_record(sample: LoopSample) -> dict:
    bench = None
    if sample.benchmark_ref is not None:
        bench = {"file": sample.benchmark_ref.file_id, "span": list(sample.benchmark_ref.loop_span)}
    return {
        "v": SCHEMA_VERSION,
        "id": sample.id,
        "loop": sample.loop_code,
        "pragma": sample.label.render() if sample.label else None,
        "source_pragma": sample.source_pragma,
        "bench": bench,
        "lang": sample.language.value,
    }


def sample_from_record(record: dict) -> LoopSample:
    """Rebuild a sample from its JSONL record.

    Raises:
        SchemaMismatch: If the record version is not supported
    """
    if record.get("v") != SCHEMA_VERSION:
        raise SchemaMismatch(f"loop record version {record.get('v')!r} is not {SCHEMA_VERSION}")
    bench = record.get("bench")
    ref = BenchmarkRef(bench["file"], tuple(bench["span"])) if bench else None
    label = parse_normalized(record["pragma"]) if record.get("pragma") else None
    return LoopSample(
        id=record.get("id") or (sample_id(ref.file_id, ref.loop_span) if ref else ""),
        loop_code=record["loop"],
        label=label,
        language=Language(record["lang"]),
        benchmark_ref=ref,
        source_pragma=record.get("source_pragma"),
    )


def write_samples(samples: Iterable[LoopSample], out: Union[Path, str]) -> int:
    count = 0
    with jsonlines.open(out, mode="w", sort_keys=True, compact=True) as writer:
        for sample in samples:
            writer.write(sample_to_record(sample))
            count += 1
    return count


def read_samples(path: Union[Path, str]) -> List[LoopSample]:
    with jsonlines.open(path) as reader:
        return [sample_from_record(record) for record in reader]


def clause_histogram(samples: Iterable[LoopSample]) -> pd.DataFrame:
    """Clause counts over positive samples, one row per language.

    ``plain`` counts labels with no clause at all; ``total`` is the number of
    positives.
    """
    counts = {language.value: dict.fromkeys(HISTOGRAM_COLUMNS, 0) for language in Language}
    for sample in samples:
        if sample.label is None:
            continue
        row = counts[sample.language.value]
        row["private"] += bool(sample.label.private_vars)
        row["reduction"] += sample.label.reduction is not None
        row["target"] += sample.label.is_target
        row["simd"] += sample.label.simd
        row["plain"] += sample.label.is_plain
        row["total"] += 1
    frame = pd.DataFrame.from_dict(counts, orient="index", columns=HISTOGRAM_COLUMNS)
    frame.index.name = "language"
    return frame.astype(int)


def pragma_breakdown(samples: Iterable[LoopSample]) -> pd.Series:
    """Positive counts per pragma shape, most frequent first."""
    shapes = [sample.label.shape() for sample in samples if sample.label is not None]
    if not shapes:
        return pd.Series([], dtype=int, name="count")
    breakdown = pd.Series(shapes).value_counts()
    breakdown.name = "count"
    breakdown.index.name = "pragma"
    return breakdown
