"""Command-line entry point: ``hpcforge <command> [<subcommand>] ...``.

Logs go to standard error; data goes to standard output or ``--out``.
"""

import argparse
import getpass
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import jsonlines
import keyring.errors
import pandas as pd

from . import __version__
from .corpus import build_corpus, completion_pairs, dedup, ingest, read_records, read_stats
from .errors import ConfigError, HpcForgeError, PragmaSyntaxError, Unnormalizable
from .harness import (
    accuracy_test,
    capture_reference,
    compile_and_run,
    compile_run_table,
    evaluate_end_to_end,
    load_benchmarks,
    load_model,
    scale_test,
)
from .metrics import codebleu, evaluate_pragmas, perplexity, score_completions
from .ompdata import clause_histogram, extract_dataset, parse_normalized, pragma_breakdown, read_samples
from .ompdata.dataset import sample_to_record
from .parsing import Language
from .reporting import report_render, table_report
from .tokompiler import lexicalize
from .utils.config_manager import CREDENTIAL_KEYS, ConfigManager, GlobalConfig
from .utils.system_info import get_system_info
from .utils.unified_api import anonymize_files

logger = logging.getLogger(__name__)

EMIT_FIELDS = ("code", "tokens", "map")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# ---------------------------------------------------------------- output helpers

def _write_json(data: Any, out: Optional[str]) -> None:
    text = json.dumps(data, indent=2, sort_keys=True, default=str)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"wrote {out}")
    else:
        sys.stdout.write(text + "\n")


def _write_jsonl(records: Iterable[dict], out: Optional[str]) -> int:
    count = 0
    if out:
        writer = jsonlines.open(out, mode="w", sort_keys=True, compact=True)
    else:
        writer = jsonlines.Writer(sys.stdout, sort_keys=True, compact=True)
    with writer:
        for record in records:
            writer.write(record)
            count += 1
    return count


def _read_jsonl(path: str) -> List[dict]:
    with jsonlines.open(path) as reader:
        return list(reader)


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(t < 1 for t in values):
        raise argparse.ArgumentTypeError(f"values must be positive, got {text!r}")
    return values


def _in_flight(args: argparse.Namespace, config: GlobalConfig) -> int:
    """``--jobs`` caps the number of concurrent model requests."""
    if getattr(args, "jobs", None) is not None:
        return min(config.harness.max_in_flight, config.jobs)
    return config.harness.max_in_flight


# ---------------------------------------------------------------- tokompile

def _tokompile_records(paths: Sequence[str], config: GlobalConfig, language: Optional[Language],
                       emit: Sequence[str]) -> Iterable[dict]:
    for anon in anonymize_files(paths, config, language):
        unit = anon.origin
        record: Dict[str, Any] = {
            "v": 1,
            "file_id": unit.file_id,
            "span": list(unit.byte_span),
            "name": unit.name,
            "seed": anon.seed,
        }
        if "code" in emit:
            record["code"] = anon.code.decode("utf-8", "replace")
        if "tokens" in emit:
            record["tokens"] = lexicalize(anon).tokens
        if "map" in emit:
            record["map"] = anon.map.to_dict()
        yield record


def cmd_tokompile(args: argparse.Namespace, config: GlobalConfig) -> int:
    emit = args.emit or list(EMIT_FIELDS)
    language = Language(args.lang) if args.lang else None
    count = _write_jsonl(_tokompile_records(args.paths, config, language, emit), args.out)
    logger.info(f"anonymized {count} functions")
    return 0


# ---------------------------------------------------------------- corpus

def cmd_corpus_build(args: argparse.Namespace, config: GlobalConfig) -> int:
    stats = build_corpus(config, args.out, show_progress=sys.stderr.isatty())
    _write_json(stats.to_dict(), args.stats)
    return 0


def cmd_corpus_stats(args: argparse.Namespace, config: GlobalConfig) -> int:
    _write_json(read_stats(args.corpus).to_dict(), args.out)
    return 0


# ---------------------------------------------------------------- ompdata

def cmd_ompdata_extract(args: argparse.Namespace, config: GlobalConfig) -> int:
    files = dedup(ingest(args.inputs, config.corpus.extensions))
    samples = extract_dataset(files, balance=config.ompdata.balance, neg_ratio=config.ompdata.neg_ratio,
                              seed=config.seed, jobs=config.jobs, show_progress=sys.stderr.isatty())
    count = _write_jsonl((sample_to_record(s) for s in samples), args.out)
    logger.info(f"wrote {count} loop samples")
    return 0


def cmd_ompdata_histogram(args: argparse.Namespace, config: GlobalConfig) -> int:
    samples = read_samples(args.loops)
    if args.breakdown:
        frame = pragma_breakdown(samples).to_frame()
        report = table_report(frame, title="pragma breakdown")
    else:
        report = table_report(clause_histogram(samples), title="clause histogram")
    _write_json(report, args.out)
    return 0


# ---------------------------------------------------------------- eval

def _parse_prediction(sample_id: str, text: Optional[str]):
    if not text:
        return None
    try:
        return parse_normalized(text)
    except (PragmaSyntaxError, Unnormalizable) as e:
        logger.warning(f"prediction for {sample_id} is not a usable pragma, counted as none: {e}")
        return None


def cmd_eval_pragma(args: argparse.Namespace, config: GlobalConfig) -> int:
    samples = read_samples(args.label)
    predicted = {record["id"]: record.get("pragma") for record in _read_jsonl(args.pred)}
    missing = [s.id for s in samples if s.id not in predicted]
    if missing:
        logger.warning(f"{len(missing)} samples have no prediction and count as 'no pragma'")
    preds = [_parse_prediction(s.id, predicted.get(s.id)) for s in samples]
    report = evaluate_pragmas(preds, [s.label for s in samples])
    _write_json(report.to_dict(), args.report)
    return 0


def cmd_eval_codebleu(args: argparse.Namespace, config: GlobalConfig) -> int:
    language = config.language
    metrics = config.metrics
    if args.candidate or args.reference:
        if not (args.candidate and args.reference):
            logger.error("--candidate and --reference are used together")
            return 2
        score = codebleu(Path(args.candidate).read_text(encoding="utf-8"),
                         Path(args.reference).read_text(encoding="utf-8"), language,
                         metrics.weights, metrics.max_n, metrics.keyword_weight, metrics.ast_depth)
        frame = pd.DataFrame([score.to_dict()], index=pd.Index([Path(args.candidate).name], name="candidate"))
        _write_json(table_report(frame, title="CodeBLEU"), args.out)
        return 0
    if not args.corpus:
        logger.error("eval codebleu needs --corpus or --candidate/--reference")
        return 2

    pairs = completion_pairs(read_records(args.corpus), args.cuts)
    if not args.completions:
        _write_jsonl(({"v": 1, "origin": p.origin, "cut": p.cut, "prompt": p.prompt, "reference": p.reference}
                      for p in pairs), args.out)
        return 0
    completions = {(r["origin"], int(r["cut"])): r.get("completion") or "" for r in _read_jsonl(args.completions)}
    missing = sum((p.origin, p.cut) not in completions for p in pairs)
    if missing:
        logger.warning(f"{missing} prompts have no completion and score zero")
    table = score_completions(pairs, [completions.get((p.origin, p.cut), "") for p in pairs], language, metrics)
    _write_json(table_report(table, title="CodeBLEU by prefix cut"), args.out)
    return 0


def cmd_eval_perplexity(args: argparse.Namespace, config: GlobalConfig) -> int:
    rows = {}
    for index, record in enumerate(_read_jsonl(args.logprobs)):
        key = str(record.get("id", index))
        rows[key] = {"tokens": len(record["logprobs"]), "perplexity": perplexity(record["logprobs"])}
    frame = pd.DataFrame.from_dict(rows, orient="index", columns=["tokens", "perplexity"])
    frame.index.name = "id"
    _write_json(table_report(frame, title="perplexity"), args.out)
    return 0


# ---------------------------------------------------------------- harness

def cmd_harness_accuracy(args: argparse.Namespace, config: GlobalConfig) -> int:
    samples = read_samples(args.loops)
    model = load_model(args.model, config.harness)
    if args.bench:
        report = evaluate_end_to_end(load_benchmarks(args.bench), samples, model,
                                     args.threads or config.harness.threads, config.harness, config.toolchain)
        logger.info(f"end-to-end: {report.accuracy.counts.summary()} -> {report.adjusted.counts.summary()}")
    else:
        report = accuracy_test(samples, model, _in_flight(args, config), get_system_info())
        logger.info(f"accuracy: {report.counts.summary()}")
    _write_json(report.to_dict(), args.out)
    return 0


def cmd_harness_run(args: argparse.Namespace, config: GlobalConfig) -> int:
    threads = args.threads or config.harness.threads
    outcomes = [compile_and_run(bench, threads=t, config=config.harness, toolchain=config.toolchain)
                for bench in load_benchmarks(args.bench) for t in threads]
    tallies = compile_run_table(outcomes)
    _write_json({
        "v": 1,
        "kind": "compile_run",
        "outcomes": [o.to_dict() for o in outcomes],
        "compile_run": {str(k): v for k, v in tallies.to_dict("index").items()},
        "system": get_system_info(config.toolchain.cc),
    }, args.out)
    return 0


def cmd_harness_scale(args: argparse.Namespace, config: GlobalConfig) -> int:
    report = scale_test(load_benchmarks(args.bench), args.threads or config.harness.threads,
                        config=config.harness, toolchain=config.toolchain)
    _write_json(report.to_dict(), args.out)
    return 0


def cmd_harness_reference(args: argparse.Namespace, config: GlobalConfig) -> int:
    updated = []
    for bench in load_benchmarks(args.bench):
        expected = bench.sources[0].parent / f"{bench.name}.expected"
        updated.append(capture_reference(bench, expected, config.harness, config.toolchain))
        logger.info(f"captured reference output of {bench.name} in {expected}")
    _write_json({"benchmarks": [b.model_dump(mode="json", exclude_none=True) for b in updated]}, args.out)
    return 0


# ---------------------------------------------------------------- report

def cmd_report(args: argparse.Namespace, config: GlobalConfig) -> int:
    rendered = report_render(args.report)
    text = rendered.csv if args.format == "csv" else rendered.text
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- configuration

def _config_key(dotted: str) -> Tuple[Optional[str], str]:
    """Split ``section.key`` (or a top-level key) and check it exists."""
    section, _, key = dotted.rpartition(".")
    fields = GlobalConfig.model_fields
    if not section and key in fields:
        return None, key
    if section in fields and key in getattr(fields[section].annotation, "model_fields", {}):
        return section, key
    raise ConfigError(f"Unknown configuration key {dotted!r}")


def cmd_config_get(args: argparse.Namespace, config: GlobalConfig) -> int:
    section, key = _config_key(args.key)
    overrides = config_overrides(args)
    scope = overrides if section is None else overrides.get(section, {})
    is_credential = (section, key) in CREDENTIAL_KEYS
    value = ConfigManager(getattr(args, "config", None)).get_config_value(
        section, key, scope, is_credential=is_credential)
    if is_credential:
        sys.stdout.write(("<set>" if value else "<unset>") + "\n")
    else:
        sys.stdout.write(json.dumps(value, default=str) + "\n")
    return 0


def cmd_credential(args: argparse.Namespace, config: GlobalConfig) -> int:
    section, key = _config_key(args.key)
    if (section, key) not in CREDENTIAL_KEYS:
        raise ConfigError(f"{args.key} is not a credential")
    manager = ConfigManager()
    name = manager.env_key(section, key)
    if args.action == "delete":
        try:
            manager.delete_credential(name)
        except keyring.errors.PasswordDeleteError:
            logger.warning(f"{name} was not in the keychain")
        return 0
    value = args.value if args.value is not None else getpass.getpass(f"{name}: ")
    if not value:
        raise ConfigError(f"empty value for {name}")
    manager.set_credential(name, value)
    logger.info(f"stored {name} in the keychain")
    return 0


# ---------------------------------------------------------------- parser

def _global_options() -> argparse.ArgumentParser:
    """Options accepted both before and after the command name."""
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument("--config", default=argparse.SUPPRESS, metavar="PATH",
                         help="JSON or YAML config file")
    options.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Global random seed")
    options.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="Cap on worker pools")
    options.add_argument("--log-level", default=argparse.SUPPRESS,
                         choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Log level (default WARNING)")
    return options


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="hpcforge", parents=[common],
                                     description="HPC code corpus, OpenMP dataset and evaluation tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = commands.add_parser("tokompile", parents=[common], help="Anonymize the functions of C/C++ files")
    p.add_argument("paths", nargs="+", help="Source files or directories")
    p.add_argument("--lang", choices=[lang.value for lang in Language], help="Force the language of every file")
    p.add_argument("--suffix-max", type=int, help="Upper bound of replacement suffixes")
    p.add_argument("--auto-extend", action=argparse.BooleanOptionalAction, default=None,
                   help="Grow the suffix range instead of failing when it is exhausted")
    p.add_argument("--emit", action="append", choices=EMIT_FIELDS,
                   help="Fields to emit (repeatable; default: all)")
    p.add_argument("--out", help="Output JSONL (default: stdout)")
    p.set_defaults(handler=cmd_tokompile)

    corpus = commands.add_parser("corpus", help="Corpus curation").add_subparsers(dest="action", required=True)
    p = corpus.add_parser("build", parents=[common], help="Ingest, dedup, filter and extract functions")
    p.add_argument("roots", nargs="*", help="Repository roots (default: corpus.roots from config)")
    p.add_argument("--out", required=True, help="Output corpus JSONL")
    p.add_argument("--stats", help="Write statistics JSON here (default: stdout)")
    p.add_argument("--anonymize", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--emit-tokens", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(handler=cmd_corpus_build)
    p = corpus.add_parser("stats", parents=[common], help="Statistics of an emitted corpus")
    p.add_argument("corpus", help="Corpus JSONL")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_corpus_stats)

    ompdata = commands.add_parser("ompdata", help="OpenMP loop datasets").add_subparsers(dest="action", required=True)
    p = ompdata.add_parser("extract", parents=[common], help="Extract labelled loops")
    p.add_argument("--in", dest="inputs", action="append", required=True, metavar="DIR",
                   help="Source directory (repeatable)")
    p.add_argument("--balance", action=argparse.BooleanOptionalAction, default=None,
                   help="Sample negatives to match the positives")
    p.add_argument("--neg-ratio", type=float, help="Negatives per positive when balancing")
    p.add_argument("--out", help="Output JSONL (default: stdout)")
    p.set_defaults(handler=cmd_ompdata_extract)
    p = ompdata.add_parser("histogram", parents=[common], help="Clause counts of a loop dataset")
    p.add_argument("loops", help="Loop JSONL")
    p.add_argument("--breakdown", action="store_true", help="Count full pragma shapes instead of clauses")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_ompdata_histogram)

    evaluate = commands.add_parser("eval", help="Metrics").add_subparsers(dest="action", required=True)
    p = evaluate.add_parser("pragma", parents=[common], help="Clause, variable and operator evaluation")
    p.add_argument("--pred", required=True, help="Predictions JSONL ({id, pragma})")
    p.add_argument("--label", required=True, help="Loop JSONL with ground-truth pragmas")
    p.add_argument("--report", help="Report JSON (default: stdout)")
    p.set_defaults(handler=cmd_eval_pragma)
    p = evaluate.add_parser("codebleu", parents=[common], help="CodeBLEU of a pair or of prefix completions")
    p.add_argument("--candidate")
    p.add_argument("--reference")
    p.add_argument("--corpus", help="Corpus JSONL to cut into prompts")
    p.add_argument("--completions", help="Completions JSONL ({origin, cut, completion})")
    p.add_argument("--cuts", type=_int_list, default=[100, 300, 600], help="Prefix lengths in tokens")
    p.add_argument("--lang", choices=[lang.value for lang in Language])
    p.add_argument("--out")
    p.set_defaults(handler=cmd_eval_codebleu)
    p = evaluate.add_parser("perplexity", parents=[common], help="Perplexity of token log-probabilities")
    p.add_argument("logprobs", help="JSONL with a logprobs list per line")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_eval_perplexity)

    harness = commands.add_parser("harness", help="Model harness").add_subparsers(dest="action", required=True)
    p = harness.add_parser("accuracy", parents=[common], help="Accuracy test, end-to-end with --bench")
    p.add_argument("--loops", required=True)
    p.add_argument("--model", required=True,
                   help="builtin:replay, builtin:heuristic, offline:<path> or an http(s) URL")
    p.add_argument("--bench", help="Benchmark JSON; adds compile-and-run reclassification")
    p.add_argument("--threads", type=_int_list)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_harness_accuracy)
    for name, handler, text in (("run", cmd_harness_run, "Build and run benchmarks"),
                                ("scale", cmd_harness_scale, "Speedup sweep over thread counts")):
        p = harness.add_parser(name, parents=[common], help=text)
        p.add_argument("--bench", required=True)
        p.add_argument("--threads", type=_int_list)
        if name == "scale":
            p.add_argument("--baseline", choices=["default", "threads1"])
        p.add_argument("--out")
        p.set_defaults(handler=handler)
    p = harness.add_parser("reference", parents=[common], help="Record reference outputs")
    p.add_argument("--bench", required=True)
    p.add_argument("--out", help="Updated benchmark JSON (default: stdout)")
    p.set_defaults(handler=cmd_harness_reference)

    p = commands.add_parser("report", parents=[common], help="Render a report JSON as a table")
    p.add_argument("report")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_report)

    settings = commands.add_parser("config", help="Inspect settings").add_subparsers(dest="action", required=True)
    p = settings.add_parser("get", parents=[common], help="Resolved value of one key")
    p.add_argument("key", help="section.key, or a top-level key such as seed")
    p.set_defaults(handler=cmd_config_get)

    credential = commands.add_parser("credential", help="Model token in the macOS keychain").add_subparsers(
        dest="action", required=True)
    p = credential.add_parser("set", parents=[common], help="Store a credential")
    p.add_argument("--key", default="harness.model_token")
    p.add_argument("--value", help="Credential value (prompted for when omitted)")
    p.set_defaults(handler=cmd_credential)
    p = credential.add_parser("delete", parents=[common], help="Remove a credential")
    p.add_argument("--key", default="harness.model_token")
    p.set_defaults(handler=cmd_credential)
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested config overrides from the flags that were given."""
    overrides: Dict[str, Any] = {}

    def put(section: Optional[str], key: str, value: Any) -> None:
        if value is None:
            return
        if section is None:
            overrides[key] = value
        else:
            overrides.setdefault(section, {})[key] = value

    put(None, "seed", getattr(args, "seed", None))
    put(None, "jobs", getattr(args, "jobs", None))
    put(None, "language", getattr(args, "lang", None))
    put("tokompiler", "suffix_range_max", getattr(args, "suffix_max", None))
    put("tokompiler", "auto_extend", getattr(args, "auto_extend", None))
    put("corpus", "roots", getattr(args, "roots", None) or None)
    put("corpus", "anonymize", getattr(args, "anonymize", None))
    put("corpus", "emit_tokens", getattr(args, "emit_tokens", None))
    put("ompdata", "balance", getattr(args, "balance", None))
    put("ompdata", "neg_ratio", getattr(args, "neg_ratio", None))
    put("harness", "baseline", getattr(args, "baseline", None))
    return overrides


def configure_logging(level: str = "WARNING") -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command.

    Returns:
        0 on success, 1 on configuration or toolchain errors, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(getattr(args, "log_level", "WARNING"))

    try:
        config = ConfigManager(getattr(args, "config", None)).get_global_config(config_overrides(args))
    except HpcForgeError as e:
        logger.error(str(e))
        return 1

    try:
        return args.handler(args, config)
    except HpcForgeError as e:
        logger.error(f"{args.command}: {e}")
        return 1
    except KeyError as e:
        logger.error(f"{args.command}: input record is missing field {e}")
        return 1
    except (jsonlines.Error, json.JSONDecodeError) as e:
        logger.error(f"{args.command}: invalid JSON input: {e}")
        return 1
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
