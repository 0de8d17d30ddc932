"""Unified API functions for easy access to the pipelines."""

import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

from ..corpus.builder import CorpusStats, build_corpus
from ..corpus.ingest import dedup, ingest
from ..errors import DecodeError, ReparseFailure, SuffixExhaustion
from ..harness.accuracy import ConfusionReport, accuracy_test
from ..harness.models import ModelEndpoint, load_model
from ..harness.runner import load_benchmarks
from ..harness.scale import ScaleReport, scale_test
from ..ompdata.dataset import LoopSample, extract_dataset
from ..parsing.functions import extract_functions
from ..parsing.source import Language, parse_source
from ..tokompiler.anonymizer import AnonymizedUnit, anonymize, derive_seed
from .config_manager import ConfigManager, GlobalConfig
from .system_info import get_system_info

logger = logging.getLogger(__name__)

PathLike = Union[Path, str]


def anonymize_files(paths: Union[PathLike, Sequence[PathLike]], config: Optional[GlobalConfig] = None,
                    language: Optional[Language] = None) -> Iterator[AnonymizedUnit]:
    """Anonymize every function of the given files or directories.

    Each function gets the seed derived from ``config.seed``, its file's
    content hash and its byte span, so output does not depend on file order.
    Functions that cannot be anonymized are logged and skipped.

    Args:
        paths: Files or directories
        config: Global configuration (package defaults when omitted)
        language: Force this language for every file instead of using suffixes

    Yields:
        AnonymizedUnit per function, in file then byte order
    """
    config = config or GlobalConfig()
    extensions = dict(config.corpus.extensions)
    if language is not None:
        extensions = {suffix: language for suffix in extensions}
    for raw in ingest(paths, extensions):
        try:
            tree = parse_source(raw.data, raw.language)
        except DecodeError as e:
            logger.warning(f"skipping undecodable file {raw.path}: {e}")
            continue
        for unit in extract_functions(tree, raw.content_hash):
            try:
                yield anonymize(unit, derive_seed(config.seed, unit.file_id, unit.byte_span), config.tokompiler)
            except (ReparseFailure, SuffixExhaustion) as e:
                logger.warning(f"skipping function {unit.name!r} in {raw.path}: {e}")


class HpcForge:
    """Unified interface over one validated configuration."""

    def __init__(self, config_path: Optional[PathLike] = None, overrides: Optional[Dict[str, Any]] = None):
        """Resolve the configuration once.

        Args:
            config_path: Optional user config file (JSON or YAML)
            overrides: Nested overrides with the highest priority

        Raises:
            ConfigError: If the merged configuration is invalid
        """
        self.config = ConfigManager(Path(config_path) if config_path else None).get_global_config(overrides)
        self._models: Dict[str, ModelEndpoint] = {}

    def model(self, spec: str) -> ModelEndpoint:
        """Get or create the model endpoint for ``spec``."""
        if spec not in self._models:
            self._models[spec] = load_model(spec, self.config.harness)
        return self._models[spec]

    def tokompile(self, paths: Union[PathLike, Sequence[PathLike]],
                  language: Optional[Language] = None) -> List[AnonymizedUnit]:
        return list(anonymize_files(paths, self.config, language))

    def build_corpus(self, out: PathLike, roots: Optional[Sequence[PathLike]] = None) -> CorpusStats:
        config = self.config
        if roots is not None:
            corpus = config.corpus.model_copy(update={"roots": [Path(r) for r in roots]})
            config = config.model_copy(update={"corpus": corpus})
        return build_corpus(config, out)

    def extract_loops(self, roots: Union[PathLike, Sequence[PathLike]]) -> List[LoopSample]:
        files = dedup(ingest(roots, self.config.corpus.extensions))
        return extract_dataset(files, self.config.ompdata.balance, self.config.ompdata.neg_ratio,
                               self.config.seed, self.config.jobs)

    def accuracy(self, samples: Sequence[LoopSample], model: str = "builtin:replay") -> ConfusionReport:
        return accuracy_test(samples, self.model(model), self.config.harness.max_in_flight, get_system_info())

    def scale(self, bench_file: PathLike, threads: Optional[Sequence[int]] = None) -> ScaleReport:
        return scale_test(load_benchmarks(bench_file), threads or self.config.harness.threads,
                          config=self.config.harness, toolchain=self.config.toolchain)


# Convenience functions for common operations
def connect_model(spec: str, config: Optional[GlobalConfig] = None) -> ModelEndpoint:
    """Create and connect a model endpoint.

    Args:
        spec: ``builtin:replay``, ``builtin:heuristic``, ``offline:<path>`` or a URL
        config: Global configuration

    Returns:
        Connected ModelEndpoint
    """
    model = load_model(spec, (config or GlobalConfig()).harness)
    model.connect()
    return model


def tokompile(paths: Union[PathLike, Sequence[PathLike]], seed: int = 0,
              language: Optional[Language] = None) -> List[AnonymizedUnit]:
    """Anonymize files with package defaults and the given seed."""
    return list(anonymize_files(paths, GlobalConfig(seed=seed), language))


def evaluate_model(samples: Sequence[LoopSample], spec: str = "builtin:replay",
                   config: Optional[GlobalConfig] = None) -> ConfusionReport:
    """Accuracy test of one model on a loop dataset."""
    config = config or GlobalConfig()
    return accuracy_test(samples, load_model(spec, config.harness), config.harness.max_in_flight, get_system_info())
