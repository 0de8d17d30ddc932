"""Tree-sitter backed C/C++ parsing.

The tree-sitter tree is converted once into immutable :class:`SyntaxNode`
values so that no other module depends on parser internals and trees can be
shared between threads.
"""

from __future__ import annotations

import enum
import logging
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, NamedTuple, Optional, Tuple, Union

import tree_sitter as ts
import tree_sitter_c
import tree_sitter_cpp

from ..errors import DecodeError

logger = logging.getLogger(__name__)


class Language(str, enum.Enum):
    """Source language of a file or unit."""

    C = "c"
    CPP = "cpp"


_GRAMMARS = {
    Language.C: ts.Language(tree_sitter_c.language()),
    Language.CPP: ts.Language(tree_sitter_cpp.language()),
}
_local = threading.local()

# Nodes emitted as a single token even though the grammar gives them children.
ATOMIC_KINDS = frozenset({
    "string_literal",
    "char_literal",
    "raw_string_literal",
    "system_lib_string",
    "number_literal",
    "user_defined_literal",
    "preproc_arg",
})
COMMENT_KIND = "comment"
_CONTINUATION = re.compile(rb"\\\r?\n[ \t]*")


def _get_parser(language: Language) -> ts.Parser:
    """Return a thread-local cached tree-sitter parser."""
    parsers = getattr(_local, "parsers", None)
    if parsers is None:
        parsers = _local.parsers = {}
    if language not in parsers:
        parsers[language] = ts.Parser(_GRAMMARS[language])
    return parsers[language]


@dataclass(frozen=True, slots=True)
class SyntaxNode:
    """One node of a concrete syntax tree; ``text`` is set on leaves only."""

    kind: str
    start: int
    end: int
    children: Tuple["SyntaxNode", ...] = ()
    named: bool = True
    field: Optional[str] = None
    text: Optional[bytes] = None
    missing: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_error(self) -> bool:
        return self.kind == "ERROR" or self.missing

    @property
    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)

    def child_by_field(self, name: str) -> Optional["SyntaxNode"]:
        for child in self.children:
            if child.field == name:
                return child
        return None

    def named_children(self) -> List["SyntaxNode"]:
        return [c for c in self.children if c.named and c.kind != COMMENT_KIND]


@dataclass(frozen=True)
class SyntaxTree:
    """Immutable parse of one source buffer."""

    source: bytes
    language: Language
    root: SyntaxNode
    error_count: int = field(default=0)

    @property
    def text(self) -> str:
        return decode_source(self.source)

    @property
    def is_clean(self) -> bool:
        return self.error_count == 0

    def node_text(self, node: SyntaxNode) -> bytes:
        return self.source[node.start:node.end]


def decode_source(data: bytes) -> str:
    """Decode as UTF-8, falling back to Latin-1.

    Raises:
        DecodeError: If the bytes look binary (contain NUL)
    """
    if b"\x00" in data:
        raise DecodeError("binary content (NUL byte) cannot be decoded as source text")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def _to_bytes(text: Union[str, bytes]) -> bytes:
    if isinstance(text, str):
        return text.encode("utf-8")
    decode_source(text)
    return bytes(text)


def _convert(tree: ts.Tree, source: bytes) -> Tuple[SyntaxNode, int]:
    """Iteratively convert a tree-sitter tree, counting ERROR/MISSING nodes."""
    errors = 0

    def make(node: ts.Node, field_name: Optional[str], kids: List[SyntaxNode]) -> SyntaxNode:
        nonlocal errors
        if node.type == "ERROR" or node.is_missing:
            errors += 1
        return SyntaxNode(
            kind=node.type,
            start=node.start_byte,
            end=node.end_byte,
            children=tuple(kids),
            named=node.is_named,
            field=field_name,
            text=None if kids else source[node.start_byte:node.end_byte],
            missing=node.is_missing,
        )

    cursor = tree.walk()
    stack: List[list] = [[cursor.node, None, []]]
    while True:
        if cursor.goto_first_child():
            stack.append([cursor.node, cursor.field_name, []])
            continue
        while True:
            node, field_name, kids = stack.pop()
            built = make(node, field_name, kids)
            if not stack:
                return built, errors
            stack[-1][2].append(built)
            if cursor.goto_next_sibling():
                stack.append([cursor.node, cursor.field_name, []])
                break
            cursor.goto_parent()


def parse_source(text: Union[str, bytes], language: Language) -> SyntaxTree:
    """Parse C or C++ source.

    Never raises for broken code: syntax errors surface as ERROR nodes and
    ``error_count``.

    Args:
        text: Source text or raw bytes
        language: Language grammar to use

    Returns:
        SyntaxTree over the exact input bytes

    Raises:
        DecodeError: If the bytes are not decodable source text
    """
    source = _to_bytes(text)
    language = Language(language)
    ts_tree = _get_parser(language).parse(source)
    root, errors = _convert(ts_tree, source)
    return SyntaxTree(source=source, language=language, root=root, error_count=errors)


def iter_nodes(node: SyntaxNode) -> Iterator[SyntaxNode]:
    """Pre-order traversal without recursion."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(current.children))


def iter_leaves(node: SyntaxNode) -> Iterator[SyntaxNode]:
    for current in iter_nodes(node):
        if current.is_leaf:
            yield current


def find_all(node: SyntaxNode, kind: str, stop_at: Tuple[str, ...] = ()) -> List[SyntaxNode]:
    """All descendants of ``kind``; does not descend into ``stop_at`` kinds below ``node``."""
    found = []
    stack = list(reversed(node.children))
    while stack:
        current = stack.pop()
        if current.kind == kind:
            found.append(current)
        if current.kind in stop_at:
            continue
        stack.extend(reversed(current.children))
    return found


def reconstruct(tree: SyntaxTree) -> bytes:
    """Rebuild the source from leaves and the gaps between them.

    Raises:
        ValueError: If leaf spans overlap or run backwards
    """
    out = bytearray()
    position = 0
    for leaf in iter_leaves(tree.root):
        if leaf.start < position:
            raise ValueError(f"leaf {leaf.kind} at {leaf.start} overlaps previous leaf ending at {position}")
        out += tree.source[position:leaf.start]
        out += leaf.text or b""
        position = leaf.end
    out += tree.source[position:]
    return bytes(out)


class Token(NamedTuple):
    """A canonical token: atomic node or non-comment leaf."""

    node: SyntaxNode
    text: bytes
    in_for_header: bool
    first_macro_param: bool


def canonical_tokens(tree: SyntaxTree, node: Optional[SyntaxNode] = None) -> List[Token]:
    """Tokens in source order, skipping comments and zero-width nodes."""
    tokens: List[Token] = []
    stack: List[Tuple[SyntaxNode, bool, bool]] = [(node or tree.root, False, False)]
    while stack:
        current, header, macro_param = stack.pop()
        if current.kind == COMMENT_KIND or current.start == current.end:
            continue
        if current.kind in ATOMIC_KINDS or current.is_leaf:
            text = tree.node_text(current)
            if current.kind == "preproc_arg":
                text = _CONTINUATION.sub(b" ", text).strip()
                if text.startswith(b"omp"):
                    text = b" ".join(text.split())
            tokens.append(Token(current, text, header, macro_param))
            continue
        pushed = []
        for index, child in enumerate(current.children):
            child_header = header or (current.kind == "for_statement" and child.field != "body")
            child_macro = current.kind == "preproc_params" and index == 0
            pushed.append((child, child_header, child_macro))
        stack.extend(reversed(pushed))
    return tokens


def _is_directive(token: Token) -> bool:
    return token.text.startswith(b"#") and token.node.kind not in ATOMIC_KINDS


def layout(tree: SyntaxTree, tokens: List[Token],
           substitute: Optional[Callable[[Token], bytes]] = None) -> Iterator[Tuple[Optional[Token], Optional[bytes]]]:
    """Yield ``(token, text)`` pairs; ``(None, None)`` marks a required line break.

    Line breaks are required before every preprocessor directive and at the
    end of its logical line. Newline leaves are consumed.
    """
    in_directive = False
    previous_end = 0
    for token in tokens:
        text = substitute(token) if substitute else token.text
        if not text.strip():
            if in_directive:
                yield None, None
            in_directive = False
            previous_end = token.node.end
            continue
        if in_directive and b"\n" in _CONTINUATION.sub(b"", tree.source[previous_end:token.node.start]):
            yield None, None
            in_directive = False
        if _is_directive(token):
            yield None, None
            in_directive = True
        yield token, text
        previous_end = token.node.end
    if in_directive:
        yield None, None


def render_tokens(tree: SyntaxTree, tokens: List[Token],
                  substitute: Optional[Callable[[Token], bytes]] = None) -> bytes:
    """Lay out tokens in the canonical style.

    Single spaces between tokens, a newline after ``{``, ``}`` and ``;``
    (except inside a ``for`` header), and preprocessor directives on lines of
    their own.
    """
    out = bytearray()
    at_line_start = True
    in_directive = False
    for token, text in layout(tree, tokens, substitute):
        if token is None:
            if not at_line_start:
                out += b"\n"
                at_line_start = True
            in_directive = False
            continue
        if _is_directive(token):
            in_directive = True
        elif not at_line_start and not token.first_macro_param:
            out += b" "
        out += text
        at_line_start = False
        if not in_directive and (text in (b"{", b"}") or (text == b";" and not token.in_for_header)):
            out += b"\n"
            at_line_start = True
    if not at_line_start:
        out += b"\n"
    return bytes(out)


def render_canonical(tree: SyntaxTree, node: Optional[SyntaxNode] = None,
                     substitute: Optional[Callable[[Token], bytes]] = None) -> bytes:
    """Regenerate code from the tree with comments removed.

    Args:
        tree: Parsed source
        node: Optional subtree to render (defaults to the whole tree)
        substitute: Optional hook returning replacement text for a token

    Returns:
        Canonically formatted source bytes
    """
    return render_tokens(tree, canonical_tokens(tree, node), substitute)
