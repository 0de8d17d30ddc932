"""Semantic anonymization and lexicalization of C/C++ functions."""

from .anonymizer import (
    AnonymizedUnit,
    Category,
    RenameMap,
    anonymize,
    compile_preamble,
    deanonymize,
    derive_seed,
    embed_in_file,
    is_isomorphic,
    normalize,
    structure_signature,
)
from .lexer import TokenStream, count_tokens, lexicalize, tokenize_source

__all__ = [
    "AnonymizedUnit",
    "Category",
    "RenameMap",
    "TokenStream",
    "anonymize",
    "compile_preamble",
    "count_tokens",
    "deanonymize",
    "derive_seed",
    "embed_in_file",
    "is_isomorphic",
    "lexicalize",
    "normalize",
    "structure_signature",
    "tokenize_source",
]
