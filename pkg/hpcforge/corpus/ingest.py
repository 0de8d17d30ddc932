"""Repository ingestion, deduplication and size filtering."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Union

from ..errors import DecodeError
from ..parsing.functions import content_hash
from ..parsing.source import Language
from ..tokompiler.lexer import count_tokens

logger = logging.getLogger(__name__)

DEFAULT_EXTENSIONS: Dict[str, Language] = {
    ".c": Language.C,
    ".h": Language.C,
    ".cc": Language.CPP,
    ".cpp": Language.CPP,
    ".cxx": Language.CPP,
    ".hpp": Language.CPP,
}


@dataclass(frozen=True)
class RawFile:
    """One source file read from disk."""

    path: Path
    data: bytes = field(repr=False)
    language: Language
    repo: str = ""
    content_hash: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "content_hash", content_hash(self.data))

    @property
    def size_bytes(self) -> int:
        return len(self.data)


def language_for(path: Path, extensions: Mapping[str, Language]) -> Optional[Language]:
    suffix = path.suffix
    if suffix in extensions:
        return Language(extensions[suffix])
    if suffix.lower() in extensions:
        return Language(extensions[suffix.lower()])
    return None


def _repo_name(root: Path, path: Path) -> str:
    relative = path.relative_to(root).parts
    return relative[0] if len(relative) > 1 else root.name


def ingest(root_paths: Union[Path, str, Sequence[Union[Path, str]]],
           extensions: Optional[Mapping[str, Language]] = None) -> Iterator[RawFile]:
    """Yield source files under the given roots in lexicographic path order.

    The first directory level below a root names the repository of a file.

    Args:
        root_paths: Directories (or single files) to scan
        extensions: Suffix to language mapping

    Yields:
        RawFile for every readable file with a known suffix
    """
    extensions = extensions or DEFAULT_EXTENSIONS
    if isinstance(root_paths, (str, Path)):
        root_paths = [root_paths]
    for root in map(Path, root_paths):
        if root.is_file():
            candidates = [root]
            base = root.parent
        else:
            candidates = sorted(p for p in root.rglob("*") if p.is_file())
            base = root
        for path in candidates:
            language = language_for(path, extensions)
            if language is None:
                continue
            try:
                data = path.read_bytes()
            except OSError as e:
                logger.warning(f"skipping unreadable file {path}: {e}")
                continue
            yield RawFile(path=path, data=data, language=language, repo=_repo_name(base, path))


class Deduplicator:
    """Exact content-hash deduplication keeping the first occurrence."""

    def __init__(self):
        self.seen: set = set()
        self.dropped = 0

    def filter(self, files: Iterable[RawFile]) -> Iterator[RawFile]:
        for raw in files:
            if raw.content_hash in self.seen:
                self.dropped += 1
                logger.debug(f"dropping duplicate {raw.path} ({raw.content_hash[:12]})")
                continue
            self.seen.add(raw.content_hash)
            yield raw


def dedup(files: Iterable[RawFile]) -> List[RawFile]:
    """Drop files whose content hash was already seen."""
    deduplicator = Deduplicator()
    kept = list(deduplicator.filter(files))
    if deduplicator.dropped:
        logger.info(f"dropped {deduplicator.dropped} duplicate files, kept {len(kept)}")
    return kept


def filter_size(file: RawFile, min_tokens: int = 100, max_bytes: int = 1_048_576) -> bool:
    """True iff the file has more than ``min_tokens`` tokens and fewer than ``max_bytes`` bytes."""
    if file.size_bytes >= max_bytes:
        return False
    try:
        return count_tokens(file.data, file.language) > min_tokens
    except DecodeError as e:
        logger.warning(f"skipping undecodable file {file.path}: {e}")
        return False
