"""Function extraction from parsed translation units."""

import hashlib
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .source import Language, SyntaxNode, SyntaxTree, decode_source, parse_source

logger = logging.getLogger(__name__)

FUNCTION_KIND = "function_definition"
# Function bodies are not searched; a local class method is not a corpus unit.
_STOP_AT = (FUNCTION_KIND,)


def content_hash(data: bytes) -> str:
    """Stable 256-bit hex identifier of a byte string."""
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class FunctionUnit:
    """One extracted function definition."""

    source_text: bytes
    language: Language
    file_id: str
    byte_span: Tuple[int, int]
    name: str

    @property
    def text(self) -> str:
        return decode_source(self.source_text)

    def parse(self) -> SyntaxTree:
        return parse_source(self.source_text, self.language)


def function_name(tree: SyntaxTree, definition: SyntaxNode) -> str:
    """Name of a function definition, following pointer and reference declarators."""
    node: Optional[SyntaxNode] = definition.child_by_field("declarator")
    while node is not None and node.kind != "function_declarator":
        inner = node.child_by_field("declarator")
        if inner is None:
            named = node.named_children()
            inner = named[-1] if named else None
        node = inner
    if node is None:
        return ""
    target = node.child_by_field("declarator")
    return tree.node_text(target).decode("utf-8", "replace") if target else ""


def function_definitions(tree: SyntaxTree) -> List[SyntaxNode]:
    """Function definition nodes with a body, outermost only, in byte order."""
    return [
        node for node in _find_definitions(tree.root)
        if node.child_by_field("body") is not None
    ]


def _find_definitions(root: SyntaxNode) -> List[SyntaxNode]:
    found = []
    stack = [root]
    while stack:
        current = stack.pop()
        if current.kind == FUNCTION_KIND:
            found.append(current)
            continue
        stack.extend(reversed(current.children))
    return found


def extract_functions(tree: SyntaxTree, file_id: str) -> List[FunctionUnit]:
    """Extract every function definition of a file.

    Member functions inside classes, namespaces and ``extern "C"`` blocks are
    included. A definition whose text does not parse cleanly on its own is
    skipped and logged.

    Args:
        tree: Parsed file
        file_id: Content hash of the origin file

    Returns:
        FunctionUnits ordered by byte position
    """
    units = []
    for node in function_definitions(tree):
        text = tree.node_text(node)
        name = function_name(tree, node)
        standalone = parse_source(text, tree.language)
        if not standalone.is_clean:
            logger.debug(f"skipping function {name!r} at {node.span} in {file_id[:12]}: "
                         f"{standalone.error_count} parse errors on its own")
            continue
        units.append(FunctionUnit(
            source_text=text,
            language=tree.language,
            file_id=file_id,
            byte_span=node.span,
            name=name,
        ))
    return units
