"""Lexicalized token streams."""

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Union

from ..parsing.omp import pragma_tokens
from ..parsing.source import Language, SyntaxTree, canonical_tokens, layout, parse_source
from .anonymizer import REPLACEMENT, AnonymizedUnit

NEWLINE = "\n"


@dataclass(frozen=True)
class TokenStream:
    """Ordered model tokens.

    Replacement identifiers are split into ``[category, "_", digits]``. A
    ``"\\n"`` token ends each preprocessor line.
    """

    tokens: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def to_code(self) -> str:
        """Single-space join with replacement triples fused back into identifiers."""
        out: List[str] = []
        index = 0
        tokens = self.tokens
        while index < len(tokens):
            if (index + 2 < len(tokens) and tokens[index + 1] == "_"
                    and REPLACEMENT.match(f"{tokens[index]}_{tokens[index + 2]}")):
                out.append(f"{tokens[index]}_{tokens[index + 2]}")
                index += 3
            else:
                out.append(tokens[index])
                index += 1
        return " ".join(out)


def _split(word: str, replacements: FrozenSet[str]) -> List[str]:
    if word in replacements:
        category, _, digits = word.partition("_")
        return [category, "_", digits]
    return [word]


def tree_tokens(tree: SyntaxTree, replacements: FrozenSet[str] = frozenset(),
                line_breaks: bool = True) -> List[str]:
    """Lexical tokens of a parsed tree with comments removed.

    Preprocessor arguments are split with the pragma lexer; string and
    character literals stay whole.

    Args:
        tree: Parsed source
        replacements: Identifiers to split into category triples
        line_breaks: Emit ``"\\n"`` tokens around preprocessor lines

    Returns:
        Token strings in source order
    """
    tokens: List[str] = []
    for token, text in layout(tree, canonical_tokens(tree)):
        if token is None:
            if line_breaks and tokens and tokens[-1] != NEWLINE:
                tokens.append(NEWLINE)
            continue
        word = text.decode("utf-8", "replace")
        if token.node.kind == "preproc_arg":
            for piece in pragma_tokens(word):
                tokens.extend(_split(piece, replacements))
        else:
            tokens.extend(_split(word, replacements))
    if tokens and tokens[-1] == NEWLINE:
        tokens.pop()
    return tokens


def lexicalize(anon: AnonymizedUnit) -> TokenStream:
    """Token stream of an anonymized unit.

    ``int func_252() {`` becomes ``["int", "func", "_", "252", "(", ")", "{"]``.
    """
    return TokenStream(tree_tokens(anon.parse(), anon.map.replacements()))


def tokenize_source(text: Union[str, bytes], language: Language,
                    tree: Optional[SyntaxTree] = None) -> List[str]:
    """Lexical tokens of raw source, without line-break markers."""
    tree = tree or parse_source(text, language)
    return tree_tokens(tree, line_breaks=False)


def count_tokens(text: Union[str, bytes], language: Language) -> int:
    return len(tokenize_source(text, language))


def join_tokens(tokens: Iterable[str]) -> str:
    return TokenStream(list(tokens)).to_code()
