"""hpcforge - HPC code corpora, OpenMP loop datasets and model evaluation."""

from .errors import ConfigError, HpcForgeError
from .harness import ConfusionReport, ScaleReport, accuracy_test, evaluate_end_to_end, load_model, scale_test
from .metrics import ConfusionCounts, codebleu, evaluate_pragmas, perplexity
from .ompdata import LoopSample, NormalizedPragma, extract_dataset, normalize_pragma
from .parsing import Language, extract_functions, parse_omp_pragma, parse_source
from .reporting import report_render
from .tokompiler import anonymize, deanonymize, lexicalize
from .utils.config_manager import ConfigManager, GlobalConfig
from .utils.unified_api import HpcForge, anonymize_files, connect_model, evaluate_model, tokompile

__version__ = "0.1.0"
__all__ = [
    "ConfigError",
    "ConfigManager",
    "ConfusionCounts",
    "ConfusionReport",
    "GlobalConfig",
    "HpcForge",
    "HpcForgeError",
    "Language",
    "LoopSample",
    "NormalizedPragma",
    "ScaleReport",
    "accuracy_test",
    "anonymize",
    "anonymize_files",
    "codebleu",
    "connect_model",
    "deanonymize",
    "evaluate_end_to_end",
    "evaluate_model",
    "evaluate_pragmas",
    "extract_dataset",
    "extract_functions",
    "lexicalize",
    "load_model",
    "normalize_pragma",
    "parse_omp_pragma",
    "parse_source",
    "perplexity",
    "report_render",
    "scale_test",
    "tokompile",
]
