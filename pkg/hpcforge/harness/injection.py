"""Replacing the pragma of one loop in a benchmark source."""

import logging
from typing import List, Tuple, Union

from ..errors import InjectionError, SpanDrift
from ..parsing.omp import parse_omp_pragma
from ..parsing.sites import find_loop, line_start, removal_span, scan_pragmas
from ..parsing.source import Language, parse_source

logger = logging.getLogger(__name__)


def _pragma_lines(pragma: str) -> List[str]:
    lines = [line.strip() for line in pragma.strip().splitlines() if line.strip()]
    if not lines:
        raise ValueError("pragma text is empty")
    for line in lines:
        parse_omp_pragma(line)
    return lines


def inject_pragma(source: Union[str, bytes], loop_span: Tuple[int, int], pragma: str,
                  language: Language = Language.C) -> Union[str, bytes]:
    """Put ``pragma`` directly above the loop at ``loop_span``.

    Pragmas already attached to the loop are removed. Each pragma line gets the
    loop's indentation. ``pragma`` may hold several lines (stacked pragmas).

    Args:
        source: Benchmark file contents
        loop_span: Byte span of the target ``for`` statement in ``source``
        pragma: Pragma text; every line must parse
        language: Source language

    Returns:
        Patched source, of the same type as ``source``

    Raises:
        SpanDrift: If the span does not cover a ``for`` statement
        PragmaSyntaxError: If a pragma line does not parse
        InjectionError: If the patched file has more parse errors than the original
    """
    lines = _pragma_lines(pragma)
    tree = parse_source(source, language)
    data = tree.source
    loop = find_loop(tree, tuple(loop_span))
    if loop is None:
        raise SpanDrift(f"span {tuple(loop_span)} is not a for statement")

    removals = sorted(removal_span(data, site.pragma_span)
                      for site in scan_pragmas(tree).sites if site.loop_span == loop.span)
    insert_at = line_start(data, loop.start)
    if insert_at == loop.start and insert_at > 0 and data[insert_at - 1:insert_at] != b"\n":
        # Loop shares its line with other code: break the line before it.
        block = b"\n" + b"".join(line.encode("utf-8") + b"\n" for line in lines)
    else:
        indent = data[insert_at:loop.start]
        block = b"".join(indent + line.encode("utf-8") + b"\n" for line in lines)

    out = bytearray()
    position = 0
    for start, end in removals:
        if start < position:
            continue
        out += data[position:start]
        position = end
    out += data[position:insert_at]
    out += block
    out += data[insert_at:]
    patched = bytes(out)

    result = parse_source(patched, language)
    if result.error_count > tree.error_count:
        raise InjectionError(f"patched file has {result.error_count} parse errors (original {tree.error_count})")
    logger.debug(f"injected {len(lines)} pragma line(s) at loop {loop.span}, removed {len(removals)}")
    return patched.decode("utf-8") if isinstance(source, str) else patched
