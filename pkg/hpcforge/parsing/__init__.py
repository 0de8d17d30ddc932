"""C/C++ and OpenMP pragma parsing."""

from .functions import FunctionUnit, content_hash, extract_functions
from .omp import (
    Clause,
    Directive,
    FirstPrivate,
    LastPrivate,
    NumThreads,
    OmpPragma,
    Other,
    Private,
    Reduction,
    Schedule,
    Simd,
    parse_omp_pragma,
    render_pragma,
    rename_pragma_variables,
)
from .sites import OrphanPragma, PragmaScan, PragmaSite, find_pragma_sites, scan_pragmas, strip_pragmas
from .source import Language, SyntaxNode, SyntaxTree, parse_source, reconstruct, render_canonical

__all__ = [
    "Clause",
    "Directive",
    "FirstPrivate",
    "FunctionUnit",
    "LastPrivate",
    "Language",
    "NumThreads",
    "OmpPragma",
    "OrphanPragma",
    "Other",
    "PragmaScan",
    "PragmaSite",
    "Private",
    "Reduction",
    "Schedule",
    "Simd",
    "SyntaxNode",
    "SyntaxTree",
    "content_hash",
    "extract_functions",
    "find_pragma_sites",
    "parse_omp_pragma",
    "parse_source",
    "reconstruct",
    "render_canonical",
    "render_pragma",
    "rename_pragma_variables",
    "scan_pragmas",
    "strip_pragmas",
]
