"""Semantic anonymization of function units.

Declared symbols and literals are replaced by ``<category>_<suffix>`` tokens
with suffixes drawn at random, the result is re-parsed, and code is
regenerated from the tree so that comments disappear.
"""

import enum
import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import ReparseFailure, SuffixExhaustion, UnknownReplacement
from ..parsing.functions import FunctionUnit, function_definitions
from ..parsing.omp import pragma_tokens, rename_pragma_variables
from ..parsing.source import (
    ATOMIC_KINDS,
    SyntaxNode,
    SyntaxTree,
    Token,
    canonical_tokens,
    parse_source,
    render_canonical,
)
from ..utils.config_manager import TokompilerConfig

logger = logging.getLogger(__name__)


class Category(str, enum.Enum):
    FUNC = "func"
    VAR = "var"
    ARR = "arr"
    NUM = "num"
    STR = "str"


REPLACEMENT = re.compile(r"^(func|var|arr|num|str)_(\d+)$")

_NAME_KINDS = frozenset({"identifier", "type_identifier", "statement_identifier"})
_STRING_KINDS = frozenset({"string_literal", "raw_string_literal", "concatenated_string"})
_NUMBER_KINDS = frozenset({"number_literal", "user_defined_literal"})
_TAG_KINDS = frozenset({"struct_specifier", "union_specifier", "enum_specifier", "class_specifier"})
# Parents whose identifier children are never local value references.
_FOREIGN_PARENTS = frozenset({
    "qualified_identifier", "preproc_ifdef", "preproc_defined", "preproc_def",
    "preproc_function_def", "preproc_params", "namespace_identifier",
})
_NO_LITERAL_PARENTS = frozenset({"preproc_include", "linkage_specification", "gnu_asm_expression"})
_SHAPED_KINDS = _NAME_KINDS | {"field_identifier"}


@dataclass(frozen=True)
class RenameMap:
    """Bijection from original symbols and literals to replacement tokens.

    ``reserved`` holds identifiers of the origin that already have the
    replacement shape; they are left alone and their suffixes are never drawn.
    """

    entries: Dict[str, str] = field(default_factory=dict)
    categories: Dict[str, Category] = field(default_factory=dict)
    seed: int = 0
    suffix_range_max: int = 1000
    reserved: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if len(set(self.entries.values())) != len(self.entries):
            raise ValueError("rename map is not injective")

    def inverse(self) -> Dict[str, str]:
        return {replacement: original for original, replacement in self.entries.items()}

    def symbols(self) -> Dict[str, str]:
        """Entries for declared names, literals excluded."""
        return {k: v for k, v in self.entries.items()
                if self.categories.get(k) not in (Category.NUM, Category.STR)}

    def replacements(self) -> FrozenSet[str]:
        return frozenset(self.entries.values())

    def to_dict(self) -> dict:
        return {"entries": dict(self.entries), "seed": self.seed,
                "suffix_range_max": self.suffix_range_max, "reserved": sorted(self.reserved)}

    @classmethod
    def from_dict(cls, data: dict) -> "RenameMap":
        entries = dict(data["entries"])
        categories = {k: Category(REPLACEMENT.match(v).group(1)) for k, v in entries.items()}
        return cls(entries=entries, categories=categories, seed=int(data.get("seed", 0)),
                   suffix_range_max=int(data.get("suffix_range_max", 1000)),
                   reserved=frozenset(data.get("reserved", ())))


@dataclass(frozen=True)
class AnonymizedUnit:
    """Anonymized rewrite of a function unit."""

    code: bytes
    map: RenameMap
    origin: FunctionUnit

    @property
    def seed(self) -> int:
        return self.map.seed

    def parse(self) -> SyntaxTree:
        return parse_source(self.code, self.origin.language)


def derive_seed(global_seed: int, file_id: str, span: Tuple[int, int]) -> int:
    """Per-unit 64-bit seed, independent of processing order."""
    digest = hashlib.blake2b(f"{global_seed}:{file_id}:{span[0]}:{span[1]}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


def _walk(root: SyntaxNode) -> Iterator[Tuple[SyntaxNode, Optional[SyntaxNode]]]:
    """Pre-order ``(node, parent)`` pairs."""
    stack: List[Tuple[SyntaxNode, Optional[SyntaxNode]]] = [(root, None)]
    while stack:
        node, parent = stack.pop()
        yield node, parent
        stack.extend((child, node) for child in reversed(node.children))


def _inner_declarator(node: SyntaxNode) -> Optional[SyntaxNode]:
    inner = node.child_by_field("declarator")
    if inner is None:
        named = node.named_children()
        inner = named[0] if named else None
    return inner


def _declared_name(node: Optional[SyntaxNode], is_parameter: bool = False) -> Optional[Tuple[SyntaxNode, Category]]:
    """Follow a declarator chain to its name and category.

    Returns None for abstract declarators and for local function prototypes,
    which refer to external functions.
    """
    category = Category.VAR
    while node is not None:
        if node.kind in ("identifier", "type_identifier"):
            return node, category
        if node.kind == "array_declarator" and category is Category.VAR:
            category = Category.ARR
        if node.kind == "function_declarator":
            inner = node.child_by_field("declarator")
            if not is_parameter and (inner is None or inner.kind != "parenthesized_declarator"):
                return None
        node = _inner_declarator(node)
    return None


class _Collector:
    """Gathers declared symbols and literals of one function in source order."""

    def __init__(self, tree: SyntaxTree, anonymize_chars: bool):
        self.tree = tree
        self.anonymize_chars = anonymize_chars
        self.symbols: Dict[str, Category] = {}
        self.literals: Dict[str, Category] = {}
        self.literal_nodes: List[Tuple[SyntaxNode, str]] = []

    def _declare(self, name_node: Optional[SyntaxNode], category: Category) -> None:
        if name_node is None:
            return
        name = self.tree.node_text(name_node).decode("utf-8", "replace")
        self.symbols.setdefault(name, category)

    def _declare_chain(self, declarator: Optional[SyntaxNode], is_parameter: bool = False) -> None:
        found = _declared_name(declarator, is_parameter)
        if found:
            self._declare(*found)

    def literal_key(self, node: SyntaxNode) -> str:
        tokens = canonical_tokens(self.tree, node)
        return b" ".join(t.text for t in tokens).decode("utf-8", "replace")

    def collect(self, definition: SyntaxNode) -> None:
        declarator = definition.child_by_field("declarator")
        while declarator is not None and declarator.kind != "function_declarator":
            declarator = _inner_declarator(declarator)
        if declarator is not None:
            target = declarator.child_by_field("declarator")
            if target is not None and target.kind == "identifier":
                self._declare(target, Category.FUNC)

        skip_below: Optional[SyntaxNode] = None
        for node, parent in _walk(definition):
            if skip_below is not None:
                if node.start < skip_below.end and node is not skip_below:
                    continue
                skip_below = None
            kind = node.kind
            if kind in ("parameter_declaration", "optional_parameter_declaration"):
                self._declare_chain(node.child_by_field("declarator"), is_parameter=True)
            elif kind in ("declaration", "type_definition"):
                for child in node.children:
                    if child.field == "declarator":
                        self._declare_chain(child)
            elif kind == "for_range_loop":
                self._declare_chain(node.child_by_field("declarator"))
            elif kind == "structured_binding_declarator":
                for child in node.named_children():
                    if child.kind == "identifier":
                        self._declare(child, Category.VAR)
            elif kind in _TAG_KINDS and node.child_by_field("body") is not None:
                tag = node.child_by_field("name")
                if tag is not None and tag.kind == "type_identifier":
                    self._declare(tag, Category.VAR)
            elif kind == "enumerator":
                self._declare(node.child_by_field("name"), Category.VAR)
            elif kind == "labeled_statement":
                self._declare(node.child_by_field("label"), Category.VAR)
            elif kind in _STRING_KINDS or kind in _NUMBER_KINDS or (kind == "char_literal" and self.anonymize_chars):
                if parent is not None and parent.kind in _NO_LITERAL_PARENTS:
                    continue
                if kind in _STRING_KINDS and parent is not None and parent.kind == "concatenated_string":
                    continue
                key = self.literal_key(node)
                category = Category.NUM if kind in _NUMBER_KINDS else Category.STR
                self.literals.setdefault(key, category)
                self.literal_nodes.append((node, key))
                skip_below = node


def _existing_suffixes(tree: SyntaxTree) -> Tuple[FrozenSet[str], FrozenSet[int]]:
    shaped = set()
    for node, _ in _walk(tree.root):
        if node.is_leaf and node.kind in _SHAPED_KINDS:
            text = (node.text or b"").decode("utf-8", "replace")
            if REPLACEMENT.match(text):
                shaped.add(text)
        elif node.kind == "preproc_arg":
            shaped.update(t for t in pragma_tokens(tree.node_text(node).decode("utf-8", "replace"))
                          if REPLACEMENT.match(t))
    return frozenset(shaped), frozenset(int(REPLACEMENT.match(s).group(2)) for s in shaped)


def draw_suffixes(count: int, seed: int, suffix_range_max: int, excluded: FrozenSet[int] = frozenset(),
                  auto_extend: bool = False) -> Tuple[List[int], int]:
    """Sample ``count`` distinct suffixes from ``[1, suffix_range_max]``.

    Args:
        count: Number of suffixes needed
        seed: Seed of the sampling generator
        suffix_range_max: Inclusive upper bound
        excluded: Suffixes that must not be drawn
        auto_extend: Multiply the range by 10 until it is large enough

    Returns:
        Tuple of (suffixes, range upper bound actually used)

    Raises:
        SuffixExhaustion: If the range is too small and ``auto_extend`` is off
    """
    upper = suffix_range_max
    while upper - len([e for e in excluded if e <= upper]) < count:
        if not auto_extend:
            raise SuffixExhaustion(f"{count} symbols need suffixes but only "
                                   f"{upper - len(excluded)} are available in [1, {upper}]")
        upper *= 10
        logger.info(f"extending suffix range to [1, {upper}] for {count} symbols")
    pool = np.setdiff1d(np.arange(1, upper + 1, dtype=np.int64), np.fromiter(excluded, dtype=np.int64))
    rng = np.random.default_rng(seed)
    return [int(s) for s in rng.choice(pool, size=count, replace=False)], upper


def _splice(source: bytes, edits: List[Tuple[int, int, bytes]]) -> bytes:
    out = bytearray()
    position = 0
    for start, end, text in sorted(edits, key=lambda e: (e[0], -e[1])):
        if start < position:
            continue
        before = source[start - 1:start] if start else b""
        after = source[end:end + 1]
        if before and (before.isalnum() or before == b"_"):
            text = b" " + text
        if after and (after.isalnum() or after == b"_"):
            text = text + b" "
        out += source[position:start] + text
        position = end
    out += source[position:]
    return bytes(out)


def normalize(unit: FunctionUnit) -> bytes:
    """Comment-free canonical rendering of the original unit."""
    return render_canonical(unit.parse())


def anonymize(unit: FunctionUnit, seed: int, config: Optional[TokompilerConfig] = None) -> AnonymizedUnit:
    """Anonymize one function.

    Args:
        unit: Cleanly parsing function
        seed: 64-bit seed for suffix sampling
        config: Anonymizer settings (defaults when omitted)

    Returns:
        AnonymizedUnit whose code parses cleanly and carries no comments

    Raises:
        ReparseFailure: If the input or the rewritten code does not parse cleanly
        SuffixExhaustion: If there are more symbols than suffixes
    """
    config = config or TokompilerConfig()
    tree = unit.parse()
    if not tree.is_clean:
        raise ReparseFailure(f"function {unit.name!r} does not parse cleanly ({tree.error_count} errors)")
    definitions = function_definitions(tree)
    if not definitions:
        raise ReparseFailure(f"no function definition found in unit {unit.name!r}")

    collector = _Collector(tree, config.anonymize_chars)
    for definition in definitions:
        collector.collect(definition)

    reserved, taken = _existing_suffixes(tree)
    originals = list(collector.symbols.items()) + list(collector.literals.items())
    suffixes, upper = draw_suffixes(len(originals), seed, config.suffix_range_max, taken, config.auto_extend)
    entries = {original: f"{category.value}_{suffix}"
               for (original, category), suffix in zip(originals, suffixes)}
    categories = dict(originals)
    rename_map = RenameMap(entries=entries, categories=categories, seed=seed,
                           suffix_range_max=upper, reserved=reserved)

    symbols = rename_map.symbols()
    edits: List[Tuple[int, int, bytes]] = []
    for node, key in collector.literal_nodes:
        edits.append((node.start, node.end, entries[key].encode()))
    for node, parent in _walk(tree.root):
        if node.is_leaf and node.kind in _NAME_KINDS:
            if parent is not None and parent.kind in _FOREIGN_PARENTS:
                continue
            name = (node.text or b"").decode("utf-8", "replace")
            if name in symbols:
                edits.append((node.start, node.end, symbols[name].encode()))
        elif node.kind == "preproc_arg" and symbols:
            text = tree.node_text(node).decode("utf-8", "replace")
            renamed = rename_pragma_variables(text, symbols)
            if renamed != text:
                edits.append((node.start, node.end, renamed.encode()))

    rewritten = _splice(tree.source, edits)
    reparsed = parse_source(rewritten, unit.language)
    if not reparsed.is_clean:
        raise ReparseFailure(f"anonymized {unit.name!r} has {reparsed.error_count} parse errors")
    code = render_canonical(reparsed)
    logger.debug(f"anonymized {unit.name!r}: {len(symbols)} symbols, {len(collector.literals)} literals")
    return AnonymizedUnit(code=code, map=rename_map, origin=unit)


def deanonymize(anon: AnonymizedUnit) -> bytes:
    """Invert the substitution of an anonymized unit.

    Returns:
        Canonical rendering token-equal to :func:`normalize` of the origin

    Raises:
        UnknownReplacement: If a replacement-shaped token has no map entry
    """
    inverse = anon.map.inverse()
    symbol_inverse = {v: k for k, v in anon.map.symbols().items()}
    tree = anon.parse()

    def check(word: str) -> None:
        if REPLACEMENT.match(word) and word not in inverse and word not in anon.map.reserved:
            raise UnknownReplacement(f"replacement token {word!r} has no entry in the rename map")

    def substitute(token: Token) -> bytes:
        text = token.text.decode("utf-8", "replace")
        if token.node.kind == "preproc_arg":
            for word in pragma_tokens(text):
                check(word)
            return rename_pragma_variables(text, symbol_inverse).encode()
        if token.node.kind in ATOMIC_KINDS:
            return token.text
        check(text)
        return inverse.get(text, text).encode()

    return render_canonical(tree, substitute=substitute)


def structure_signature(tree: SyntaxTree) -> List[Tuple[str, int]]:
    """Pre-order ``(kind, child count)`` list with name and literal subtrees collapsed."""
    collapsed = _NAME_KINDS | _STRING_KINDS | _NUMBER_KINDS | {"char_literal"}
    signature = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        kids = [c for c in node.children if c.kind != "comment"]
        if node.kind in collapsed or (
            node.kind == "type_descriptor" and len(kids) == 1 and kids[0].kind == "type_identifier"
        ):
            signature.append(("<atom>", 0))
            continue
        if node.kind == "comment":
            continue
        signature.append((node.kind, len(kids)))
        stack.extend(reversed(kids))
    return signature


def is_isomorphic(a: SyntaxTree, b: SyntaxTree) -> bool:
    """Same shape and node kinds up to identifier and literal text."""
    return structure_signature(a) == structure_signature(b)


def compile_preamble(anon: AnonymizedUnit) -> str:
    """``#define`` lines binding literal replacements to their original values."""
    lines = [f"#define {replacement} {original}"
             for original, replacement in anon.map.entries.items()
             if anon.map.categories.get(original) in (Category.NUM, Category.STR)]
    return "".join(line + "\n" for line in lines)


def embed_in_file(file_source: bytes, anon: AnonymizedUnit) -> bytes:
    """Replace the origin function in its file by the anonymized code.

    The original signature is re-declared after the replacement so other
    functions of the file that call it still compile.
    """
    start, end = anon.origin.byte_span
    tree = anon.origin.parse()
    definition = function_definitions(tree)[0]
    body = definition.child_by_field("body")
    prototype = tree.source[:body.start].rstrip() + b";\n"
    undefs = "".join(f"#undef {r}\n" for o, r in anon.map.entries.items()
                     if anon.map.categories.get(o) in (Category.NUM, Category.STR))
    replacement = b"\n" + compile_preamble(anon).encode() + anon.code + undefs.encode() + prototype
    return file_source[:start] + replacement + file_source[end:]
