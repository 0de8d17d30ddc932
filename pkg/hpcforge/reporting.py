"""Rendering JSON reports as text tables and CSV."""

import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Tuple, Union

import pandas as pd

from .errors import SchemaMismatch
from .metrics.confusion import ConfusionCounts, format_rate
from .metrics.speedup import SpeedupBucket

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RATE_COLUMNS = ["Precision", "Recall", "Accuracy"]
CONFUSION_COLUMNS = ["tp", "fp", "tn", "fn"] + RATE_COLUMNS
VERDICT_COLUMNS = ["Pass", "CompileFail", "RunFail", "OutputMismatch", "Timeout"]

Section = Tuple[str, pd.DataFrame]


class RenderedReport(NamedTuple):
    text: str
    csv: str


def _confusion_row(counts: dict) -> Dict[str, object]:
    confusion = ConfusionCounts.from_dict(counts)
    return {
        "tp": confusion.tp, "fp": confusion.fp, "tn": confusion.tn, "fn": confusion.fn,
        "Precision": format_rate(confusion.precision),
        "Recall": format_rate(confusion.recall),
        "Accuracy": format_rate(confusion.accuracy),
    }


def confusion_frame(rows: Dict[str, dict]) -> pd.DataFrame:
    """One row per named set of confusion counts, rates as whole percentages."""
    frame = pd.DataFrame.from_dict({name: _confusion_row(c) for name, c in rows.items()},
                                   orient="index", columns=CONFUSION_COLUMNS)
    frame.index.name = "row"
    return frame


def verdict_frame(tallies: Dict[str, dict]) -> pd.DataFrame:
    frame = pd.DataFrame.from_dict(tallies, orient="index", columns=VERDICT_COLUMNS).fillna(0).astype(int)
    frame.index.name = "threads"
    return frame


def _render_confusion(report: dict) -> List[Section]:
    rows = {report.get("model") or "accuracy": report["counts"]} if report.get("counts") else {}
    return [("accuracy test", confusion_frame(rows))]


def _render_end_to_end(report: dict) -> List[Section]:
    rows = {}
    if report.get("accuracy"):
        rows["accuracy with ground-truth label"] = report["accuracy"]["counts"]
    if report.get("adjusted"):
        rows["with compile and run check"] = report["adjusted"]["counts"]
    return [("accuracy test", confusion_frame(rows)),
            ("compile and run", verdict_frame(report.get("compile_run") or {}))]


def _render_compile_run(report: dict) -> List[Section]:
    sections = [("compile and run", verdict_frame(report.get("compile_run") or {}))]
    outcomes = report.get("outcomes") or []
    frame = pd.DataFrame(outcomes, columns=["benchmark", "threads", "verdict", "wall_time_s"])
    sections.append(("runs", frame.set_index("benchmark")))
    return sections


def _render_pragma_eval(report: dict) -> List[Section]:
    rows = {kind: report[kind] for kind in ("private", "reduction") if report.get(kind)}
    sections = [("clause presence", confusion_frame(rows))]
    curves = {kind: report.get(f"{kind}_curve") or {} for kind in ("private", "reduction")}
    if any(curves.values()):
        curve_frame = pd.DataFrame(curves).T
        curve_frame.index.name = "clause"
        sections.append(("exact variable match by variable count", curve_frame))
    return sections


def _render_scale(report: dict) -> List[Section]:
    columns = [bucket.value for bucket in SpeedupBucket]
    frame = pd.DataFrame.from_dict(report.get("histograms") or {}, orient="index", columns=columns)
    frame = frame.fillna(0).astype(int)
    frame.index.name = "threads"
    frame["total"] = frame.sum(axis=1)
    return [(f"speedup buckets (baseline {report.get('baseline', 'default')})", frame)]


def _render_corpus(report: dict) -> List[Section]:
    columns = ["repos", "size_bytes", "files", "functions"]
    frame = pd.DataFrame.from_dict(report.get("languages") or {}, orient="index", columns=columns)
    frame.index.name = "language"
    return [("corpus", frame)]


def _render_table(report: dict) -> List[Section]:
    frame = pd.DataFrame(report.get("rows") or [], columns=report.get("columns") or [])
    if report.get("index") and report["index"] in frame.columns:
        frame = frame.set_index(report["index"])
    return [(report.get("title") or "table", frame)]


_RENDERERS: Dict[str, Callable[[dict], List[Section]]] = {
    "confusion_report": _render_confusion,
    "end_to_end": _render_end_to_end,
    "compile_run": _render_compile_run,
    "pragma_eval": _render_pragma_eval,
    "scale_report": _render_scale,
    "corpus_stats": _render_corpus,
    "table": _render_table,
}


def table_report(frame: pd.DataFrame, title: str = "") -> dict:
    """Wrap a DataFrame as a versioned ``table`` report."""
    index = frame.index.name or "index"
    flat = frame.rename_axis(index).reset_index()
    return {
        "v": SCHEMA_VERSION,
        "kind": "table",
        "title": title,
        "index": index,
        "columns": [str(c) for c in flat.columns],
        "rows": json.loads(flat.to_json(orient="values")),
    }


def report_sections(report: dict) -> List[Section]:
    """Titled DataFrames making up a report.

    Raises:
        SchemaMismatch: If the version or kind is not supported
    """
    if not isinstance(report, dict):
        raise SchemaMismatch(f"report must be a JSON object, got {type(report).__name__}")
    if report.get("v") != SCHEMA_VERSION:
        raise SchemaMismatch(f"report version {report.get('v')!r} is not {SCHEMA_VERSION}")
    kind = report.get("kind")
    if kind not in _RENDERERS:
        raise SchemaMismatch(f"unknown report kind {kind!r}; expected one of {sorted(_RENDERERS)}")
    return _RENDERERS[kind](report)


def _text(frame: pd.DataFrame) -> str:
    if frame.empty:
        return "  ".join([frame.index.name or ""] + [str(c) for c in frame.columns]).strip()
    return frame.to_string()


def report_render(report: Union[dict, Path, str]) -> RenderedReport:
    """Render a report as aligned text tables and as CSV.

    An empty report renders its table headers only.

    Args:
        report: Report dictionary or path to a report JSON file

    Returns:
        RenderedReport with ``text`` and ``csv``; sections are separated by a blank line

    Raises:
        SchemaMismatch: If the report is not a supported schema
    """
    if not isinstance(report, dict):
        path = Path(report)
        try:
            report = json.loads(path.read_text(encoding="utf-8"))
        except ValueError as e:
            raise SchemaMismatch(f"{path} is not JSON: {e}")
    sections = report_sections(report)
    text = "\n\n".join(f"{title}\n{_text(frame)}" for title, frame in sections)
    csv = "\n".join(frame.to_csv() for _, frame in sections)
    return RenderedReport(text=text + "\n", csv=csv)


def rate_rows(report: dict) -> List[str]:
    """``Precision Recall Accuracy`` strings of the first table of a report, one per row."""
    _, frame = report_sections(report)[0]
    if not set(RATE_COLUMNS) <= set(frame.columns):
        return []
    return [" ".join(str(v) for v in row) for row in frame[RATE_COLUMNS].itertuples(index=False)]
