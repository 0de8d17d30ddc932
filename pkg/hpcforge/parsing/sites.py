"""Locating, stripping and listing OpenMP pragma sites."""

import logging
import re
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from ..errors import ParseFailure, PragmaSyntaxError
from .omp import OmpPragma, is_omp_pragma, parse_omp_pragma
from .source import COMMENT_KIND, Language, SyntaxNode, SyntaxTree, iter_nodes, parse_source

logger = logging.getLogger(__name__)

LOOP_KIND = "for_statement"
_DIRECTIVE_LINE = re.compile(rb"^\s*#\s*pragma\s+omp\b")


@dataclass(frozen=True)
class PragmaSite:
    """A parsed ``#pragma omp`` directly preceding a ``for`` statement."""

    file_id: str
    pragma: OmpPragma
    loop_span: Tuple[int, int]
    pragma_span: Tuple[int, int]


@dataclass(frozen=True)
class OrphanPragma:
    """A ``#pragma omp`` not attached to a ``for`` loop, or one that does not parse."""

    file_id: str
    text: str
    pragma_span: Tuple[int, int]
    reason: str
    pragma: Optional[OmpPragma] = None


@dataclass(frozen=True)
class PragmaScan:
    sites: List[PragmaSite]
    orphans: List[OrphanPragma]


def _is_pragma_node(tree: SyntaxTree, node: SyntaxNode) -> bool:
    return (node.kind.startswith("preproc_") and node.kind not in ("preproc_arg", "preproc_directive")
            and bool(_DIRECTIVE_LINE.match(tree.node_text(node))))


def _pragma_text(tree: SyntaxTree, node: SyntaxNode) -> str:
    return tree.node_text(node).decode("utf-8", "replace").rstrip("\r\n")


def scan_pragmas(tree: SyntaxTree, file_id: str = "") -> PragmaScan:
    """Find every OpenMP pragma and attach it to the ``for`` loop it precedes.

    Consecutive pragmas before one loop (``parallel`` then ``for``) each make a
    site for that loop. Comments between a pragma and its loop are skipped.

    Args:
        tree: Parsed file
        file_id: Origin identifier copied into results

    Returns:
        PragmaScan with sites and orphans, both in byte order
    """
    sites: List[PragmaSite] = []
    orphans: List[OrphanPragma] = []
    for parent in iter_nodes(tree.root):
        children = parent.children
        for index, child in enumerate(children):
            if not _is_pragma_node(tree, child):
                continue
            text = _pragma_text(tree, child)
            target = None
            for follower in children[index + 1:]:
                if follower.kind == COMMENT_KIND or _is_pragma_node(tree, follower):
                    continue
                target = follower
                break
            try:
                pragma = parse_omp_pragma(text)
            except PragmaSyntaxError as e:
                logger.debug(f"unparseable pragma at {child.span}: {e}")
                orphans.append(OrphanPragma(file_id, text, child.span, f"unparseable: {e}"))
                continue
            if target is None or target.kind != LOOP_KIND:
                following = target.kind if target is not None else "end of block"
                orphans.append(OrphanPragma(file_id, text, child.span, f"followed by {following}", pragma))
                continue
            sites.append(PragmaSite(file_id, pragma, target.span, child.span))
    sites.sort(key=lambda s: s.pragma_span)
    orphans.sort(key=lambda o: o.pragma_span)
    return PragmaScan(sites=sites, orphans=orphans)


def find_pragma_sites(tree: SyntaxTree, text: Optional[bytes] = None, file_id: str = "") -> List[PragmaSite]:
    """Pragma sites of a parsed file.

    ``text`` is accepted for callers holding the source separately; it must
    be the bytes the tree was parsed from.
    """
    if text is not None and bytes(text) != tree.source:
        raise ValueError("text does not match the parsed tree source")
    return scan_pragmas(tree, file_id).sites


def line_start(source: bytes, position: int) -> int:
    """Start of the indentation before ``position`` if only blanks precede it on its line."""
    start = position
    while start > 0 and source[start - 1] in b" \t":
        start -= 1
    if start == 0 or source[start - 1:start] == b"\n":
        return start
    return position


def removal_span(source: bytes, pragma_span: Tuple[int, int]) -> Tuple[int, int]:
    """Bytes to delete to remove a pragma line with its indentation and newline."""
    start, end = pragma_span
    if end == len(source) or source[end - 1:end] != b"\n":
        while end < len(source) and source[end:end + 1] in (b"\r", b"\n"):
            end += 1
            if source[end - 1:end] == b"\n":
                break
    return line_start(source, start), end


def omp_pragma_nodes(tree: SyntaxTree) -> List[SyntaxNode]:
    return sorted((n for n in iter_nodes(tree.root) if _is_pragma_node(tree, n)), key=lambda n: n.start)


def strip_pragmas(text: Union[str, bytes], language: Language,
                  max_parse_errors: int = 0) -> Tuple[Union[str, bytes], List[PragmaSite]]:
    """Remove every ``#pragma omp`` line.

    Only directives are removed. A pragma written inside a comment, such as
    ``// #pragma omp parallel for``, is comment text and stays as it was.

    Args:
        text: File contents
        language: Source language
        max_parse_errors: ERROR nodes tolerated in the input

    Returns:
        Tuple of (serial text of the same type as ``text``, removed loop sites with
        spans into the original)

    Raises:
        ParseFailure: If the input has more parse errors than allowed, or if removing
            the pragmas leaves more errors than the input had
    """
    tree = parse_source(text, language)
    if tree.error_count > max_parse_errors:
        raise ParseFailure(f"input has {tree.error_count} parse errors (threshold {max_parse_errors})")
    scan = scan_pragmas(tree)
    source = tree.source
    out = bytearray()
    position = 0
    for node in omp_pragma_nodes(tree):
        start, end = removal_span(source, node.span)
        if start < position:
            continue
        out += source[position:start]
        position = end
    out += source[position:]
    serial = bytes(out)
    reparsed = parse_source(serial, language)
    if reparsed.error_count > tree.error_count:
        raise ParseFailure(f"serial text has {reparsed.error_count} parse errors, input had {tree.error_count}")
    if scan.sites or scan.orphans:
        logger.debug(f"stripped {len(scan.sites)} loop pragmas and {len(scan.orphans)} orphans")
    return (serial.decode("utf-8") if isinstance(text, str) else serial), scan.sites


def for_loops(tree: SyntaxTree) -> List[SyntaxNode]:
    """Every ``for`` statement in byte order, nested loops included."""
    return [n for n in iter_nodes(tree.root) if n.kind == LOOP_KIND]


def find_loop(tree: SyntaxTree, span: Tuple[int, int]) -> Optional[SyntaxNode]:
    """The ``for`` statement with exactly this span, if any."""
    for node in iter_nodes(tree.root):
        if node.start > span[0]:
            break
        if node.kind == LOOP_KIND and node.span == tuple(span):
            return node
    return None
