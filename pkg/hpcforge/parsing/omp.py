"""OpenMP pragma parser.

A pragma is read as a flat list of items, each a word with an optional
balanced parenthesised argument. Leading items form the directive; the rest
are clauses.
"""

import enum
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import LarkError

from ..errors import MalformedClause, NotAPragma, UnknownDirective

logger = logging.getLogger(__name__)

_ITEM_GRAMMAR = r"""
start: (item _SEP?)*
item: NAME group?
group: LPAR _content* RPAR
_content: ATOM | _nested
_nested: LPAR _content* RPAR

_SEP: ","
LPAR: "("
RPAR: ")"
NAME: /[A-Za-z_][A-Za-z0-9_]*/
ATOM: /[^()\s]+/

%import common.WS
%ignore WS
"""

_TOKEN_GRAMMAR = r"""
start: (WORD | NUMBER | OP2 | OP1)*

WORD: /[A-Za-z_][A-Za-z0-9_]*/
NUMBER: /[0-9][0-9A-Za-z_.]*/
OP2.2: "&&" | "||" | "<<" | ">>" | "<=" | ">=" | "==" | "!=" | "->" | "::" | "++" | "--"
OP1: /[^\sA-Za-z0-9_]/

%import common.WS
%ignore WS
"""

_item_parser = Lark(_ITEM_GRAMMAR, parser="lalr")
_token_lexer = Lark(_TOKEN_GRAMMAR, parser="lalr", lexer="basic")

_PREFIX = re.compile(r"^\s*#\s*pragma\s+omp\b")
_BODY_PREFIX = re.compile(r"^\s*(?:#\s*pragma\s+)?omp\b")
_CONTINUATION = re.compile(r"\\\r?\n")
_IDENTIFIER = re.compile(r"(?<!\.)(?<!->)(?<!::)(?<!\w)([A-Za-z_]\w*)\b")

REDUCTION_OPS = frozenset({"+", "-", "*", "&", "|", "^", "&&", "||", "min", "max"})

# Which directive word may follow which; None keys the first word.
_DIRECTIVE_NEXT: Dict[Optional[str], frozenset] = {
    None: frozenset({
        "parallel", "for", "do", "simd", "target", "teams", "distribute", "critical", "atomic",
        "barrier", "single", "master", "masked", "sections", "section", "task", "taskloop",
        "taskwait", "taskgroup", "taskyield", "flush", "ordered", "declare", "loop",
        "threadprivate", "requires", "scan", "cancel", "cancellation", "end", "begin",
        "metadirective", "interop", "tile", "unroll", "workshare", "allocate", "depobj",
        "nothing", "error", "dispatch", "assume", "scope",
    }),
    "parallel": frozenset({"for", "do", "sections", "workshare", "loop", "masked", "master"}),
    "target": frozenset({"teams", "parallel", "data", "enter", "exit", "update"}),
    "teams": frozenset({"distribute", "loop"}),
    "distribute": frozenset({"parallel"}),
    "enter": frozenset({"data"}),
    "exit": frozenset({"data"}),
    "masked": frozenset({"taskloop"}),
    "master": frozenset({"taskloop"}),
    "cancellation": frozenset({"point"}),
    "atomic": frozenset({"read", "write", "update", "capture", "compare"}),
    "end": frozenset({"declare", "metadirective", "assume"}),
    "begin": frozenset({"declare", "metadirective", "assume"}),
    "declare": frozenset({"target", "variant"}),
}


class Directive(str, enum.Enum):
    """Loop directives this toolkit distinguishes; anything else is OTHER."""

    PARALLEL = "parallel"
    PARALLEL_FOR = "parallel_for"
    FOR = "for"
    TARGET_TEAMS_DISTRIBUTE_PARALLEL_FOR = "target_teams_distribute_parallel_for"
    SIMD = "simd"
    OTHER = "other"


_DIRECTIVE_BY_WORDS = {
    ("parallel",): Directive.PARALLEL,
    ("parallel", "for"): Directive.PARALLEL_FOR,
    ("for",): Directive.FOR,
    ("target", "teams", "distribute", "parallel", "for"): Directive.TARGET_TEAMS_DISTRIBUTE_PARALLEL_FOR,
    ("simd",): Directive.SIMD,
}


@dataclass(frozen=True)
class Private:
    vars: Tuple[str, ...]


@dataclass(frozen=True)
class FirstPrivate:
    vars: Tuple[str, ...]


@dataclass(frozen=True)
class LastPrivate:
    vars: Tuple[str, ...]


@dataclass(frozen=True)
class Reduction:
    op: str
    vars: Tuple[str, ...]


@dataclass(frozen=True)
class Simd:
    pass


@dataclass(frozen=True)
class Schedule:
    kind: str
    chunk: Optional[str] = None


@dataclass(frozen=True)
class NumThreads:
    expr: str


@dataclass(frozen=True)
class Other:
    """Any clause kept verbatim, e.g. ``collapse(2)``."""

    raw: str


Clause = Union[Private, FirstPrivate, LastPrivate, Reduction, Simd, Schedule, NumThreads, Other]


@dataclass(frozen=True)
class OmpPragma:
    """Structured ``#pragma omp`` line.

    ``raw_text`` is excluded from equality so a rendered pragma re-parses to
    an equal value.
    """

    directive: Directive
    clauses: Tuple[Clause, ...] = ()
    directive_words: Tuple[str, ...] = ()
    raw_text: str = field(default="", compare=False)

    def clauses_of(self, kind: type) -> List[Clause]:
        return [c for c in self.clauses if isinstance(c, kind)]

    @property
    def has_simd(self) -> bool:
        return any(isinstance(c, Simd) for c in self.clauses)

    @property
    def is_loop_directive(self) -> bool:
        return self.directive is not Directive.OTHER


class _ItemTransformer(Transformer):
    """Turns the item tree into ``(name, args, (arg_start, arg_end))`` tuples."""

    def start(self, items):
        return list(items)

    def group(self, children):
        return (children[0].end_pos, children[-1].start_pos)

    def item(self, children):
        name: Token = children[0]
        span = children[1] if len(children) > 1 else None
        return (str(name), span)


def _join_continuations(text: str) -> str:
    return _CONTINUATION.sub(" ", text)


def _read_items(body: str) -> List[Tuple[str, Optional[str], Optional[Tuple[int, int]]]]:
    """Split the text after ``omp`` into ``(name, args, args_span)`` items.

    Raises:
        MalformedClause: If parentheses are unbalanced or an item is not a word
    """
    depth = 0
    for ch in body:
        depth += (ch == "(") - (ch == ")")
        if depth < 0:
            break
    if depth != 0:
        raise MalformedClause(f"unbalanced parentheses in pragma: {body.strip()!r}")
    try:
        parsed = _ItemTransformer().transform(_item_parser.parse(body))
    except LarkError as e:
        raise MalformedClause(f"cannot read pragma clauses {body.strip()!r}: {e}") from e
    return [(name, body[span[0]:span[1]].strip() if span else None, span) for name, span in parsed]


def _split_list(text: str) -> List[str]:
    """Split on top-level commas."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    parts.append("".join(current).strip())
    return parts


def _var_list(name: str, args: Optional[str]) -> Tuple[str, ...]:
    names = tuple(v for v in _split_list(args or "") if v)
    if not names or len(names) != len(_split_list(args or "")):
        raise MalformedClause(f"{name} clause needs a non-empty variable list, got {args!r}")
    return names


def _build_clause(name: str, args: Optional[str]) -> Clause:
    raw = name if args is None else f"{name}({args})"
    lowered = name.lower()
    if lowered in ("private", "firstprivate", "lastprivate"):
        if args is not None and ":" in args:
            return Other(raw)
        kind = {"private": Private, "firstprivate": FirstPrivate, "lastprivate": LastPrivate}[lowered]
        return kind(_var_list(name, args))
    if lowered == "reduction" and args is not None:
        op, sep, rest = args.partition(":")
        if not sep:
            raise MalformedClause(f"reduction clause without operator: {raw!r}")
        op = op.strip()
        if op not in REDUCTION_OPS:
            return Other(raw)
        return Reduction(op, _var_list(name, rest))
    if lowered == "simd" and args is None:
        return Simd()
    if lowered == "schedule" and args:
        parts = _split_list(args)
        if not parts[0] or len(parts) > 2:
            raise MalformedClause(f"invalid schedule clause: {raw!r}")
        return Schedule(parts[0], parts[1] if len(parts) == 2 else None)
    if lowered == "num_threads" and args:
        return NumThreads(args)
    return Other(raw)


def parse_omp_pragma(text: str) -> OmpPragma:
    """Parse a ``#pragma omp`` line.

    Args:
        text: Pragma text; backslash continuations are joined first

    Returns:
        Structured pragma; unknown clauses are kept as :class:`Other`

    Raises:
        NotAPragma: If the text does not start with ``#pragma omp``
        MalformedClause: If parentheses are unbalanced or a clause list is empty
        UnknownDirective: If the first word is not an OpenMP directive
    """
    joined = _join_continuations(text)
    match = _PREFIX.match(joined)
    if not match:
        raise NotAPragma(f"not an OpenMP pragma: {text.strip()[:60]!r}")
    items = _read_items(joined[match.end():])
    if not items:
        raise UnknownDirective("pragma has no directive after 'omp'")

    first, first_args, _ = items[0]
    if first not in _DIRECTIVE_NEXT[None]:
        raise UnknownDirective(f"unknown OpenMP directive {first!r} in {text.strip()!r}")

    words = [first]
    clauses: List[Clause] = []
    if first_args is not None:
        clauses.append(Other(f"{first}({first_args})"))
    index = 1
    while index < len(items):
        name, args, _ = items[index]
        if args is None and name in _DIRECTIVE_NEXT.get(words[-1], ()) and not clauses:
            words.append(name)
            index += 1
        else:
            break
    clauses.extend(_build_clause(name, args) for name, args, _ in items[index:])

    directive = _DIRECTIVE_BY_WORDS.get(tuple(words), Directive.OTHER)
    return OmpPragma(directive=directive, clauses=tuple(clauses),
                     directive_words=tuple(words), raw_text=text)


def render_clause(clause: Clause) -> str:
    if isinstance(clause, (Private, FirstPrivate, LastPrivate)):
        return f"{type(clause).__name__.lower()}({', '.join(clause.vars)})"
    if isinstance(clause, Reduction):
        return f"reduction({clause.op}:{', '.join(clause.vars)})"
    if isinstance(clause, Simd):
        return "simd"
    if isinstance(clause, Schedule):
        return f"schedule({clause.kind}, {clause.chunk})" if clause.chunk else f"schedule({clause.kind})"
    if isinstance(clause, NumThreads):
        return f"num_threads({clause.expr})"
    return clause.raw


def render_pragma(pragma: OmpPragma) -> str:
    """Render a pragma as a single ``#pragma omp`` line."""
    words = list(pragma.directive_words)
    clauses = list(pragma.clauses)
    # A leading clause carrying the first word's arguments, e.g. critical(name)
    if clauses and isinstance(clauses[0], Other) and clauses[0].raw.startswith(f"{words[0]}("):
        words[0] = clauses.pop(0).raw
    return " ".join(["#pragma omp", *words, *(render_clause(c) for c in clauses)])


def is_omp_pragma(text: str) -> bool:
    return bool(_PREFIX.match(_join_continuations(text)))


def rename_pragma_variables(text: str, mapping: Mapping[str, str]) -> str:
    """Rename identifiers inside clause argument lists.

    Directive and clause words are untouched, as are reduction operators and
    member names after ``.``, ``->`` or ``::``. Text that is not an OpenMP
    pragma is returned unchanged.

    Args:
        text: ``#pragma omp ...`` line or the argument after ``#pragma``
        mapping: Original identifier to replacement

    Returns:
        Text with the same layout and renamed variables
    """
    joined = _join_continuations(text)
    match = _BODY_PREFIX.match(joined)
    if not match or not mapping:
        return joined if match else text
    offset = match.end()
    try:
        items = _read_items(joined[offset:])
    except MalformedClause:
        logger.debug(f"leaving malformed pragma unrenamed: {joined!r}")
        return joined

    def rename(m: re.Match) -> str:
        return mapping.get(m.group(1), m.group(1))

    out, position = [], 0
    for name, _args, span in items:
        if span is None:
            continue
        start, end = offset + span[0], offset + span[1]
        if name.lower() == "reduction" and ":" in joined[start:end]:
            start = joined.index(":", start) + 1
        out.append(joined[position:start])
        out.append(_IDENTIFIER.sub(rename, joined[start:end]))
        position = end
    out.append(joined[position:])
    return "".join(out)


def pragma_tokens(text: str) -> List[str]:
    """Lexical tokens of pragma text, e.g. ``reduction(+:s)`` -> reduction ( + : s )."""
    return [str(token) for token in _token_lexer.lex(_join_continuations(text))]
