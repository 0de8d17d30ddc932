"""CodeBLEU: n-gram, keyword-weighted n-gram, AST subtree and dataflow match.

The combined score is ``a*ngram + b*weighted_ngram + c*ast + d*dataflow``.
A structural component with nothing to match against in the reference is
undefined; its weight is shared among the defined components in proportion
to their own weights.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from nltk.translate.bleu_score import brevity_penalty, closest_ref_length, modified_precision

from ..errors import TokenizeFailure
from ..parsing.source import COMMENT_KIND, Language, SyntaxNode, SyntaxTree, iter_nodes, parse_source
from ..tokompiler.lexer import tokenize_source

logger = logging.getLogger(__name__)

DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
KEYWORD_WEIGHT = 5.0
MAX_N = 4
AST_DEPTH = 3

C_KEYWORDS = frozenset({
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum",
    "extern", "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return",
    "short", "signed", "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void",
    "volatile", "while", "_Bool", "_Complex", "_Atomic", "_Thread_local", "_Alignas", "_Alignof",
    "_Noreturn", "_Static_assert", "#include", "#define", "#pragma", "#if", "#ifdef", "#ifndef",
    "#else", "#elif", "#endif", "#undef", "omp",
})
CPP_KEYWORDS = C_KEYWORDS | frozenset({
    "alignas", "alignof", "and", "bool", "catch", "class", "constexpr", "const_cast", "decltype",
    "delete", "dynamic_cast", "explicit", "export", "false", "friend", "mutable", "namespace", "new",
    "noexcept", "not", "nullptr", "operator", "or", "private", "protected", "public",
    "reinterpret_cast", "static_assert", "static_cast", "template", "this", "throw", "true", "try",
    "typeid", "typename", "using", "virtual", "xor", "override", "final", "co_await", "co_return",
    "co_yield", "concept", "requires",
})
KEYWORDS = {Language.C: C_KEYWORDS, Language.CPP: CPP_KEYWORDS}

_DEFINING_KINDS = frozenset({"assignment_expression", "init_declarator", "update_expression"})


@dataclass(frozen=True)
class CodeBleuScore:
    """Component scores in [0, 1]; ``None`` marks an undefined structural component."""

    ngram: float
    weighted_ngram: float
    ast_match: Optional[float]
    dataflow_match: Optional[float]
    combined: float
    weights: Tuple[float, float, float, float] = DEFAULT_WEIGHTS

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {
            "ngram": self.ngram,
            "weighted_ngram": self.weighted_ngram,
            "ast_match": self.ast_match,
            "dataflow_match": self.dataflow_match,
            "combined": self.combined,
        }


def _geometric_mean(precisions: Sequence[float]) -> float:
    if any(p == 0 for p in precisions):
        return 0.0
    return math.exp(sum(math.log(p) for p in precisions) / len(precisions))


def _effective_order(candidate: Sequence[str], reference: Sequence[str], max_n: int) -> int:
    return max(1, min(max_n, len(candidate), len(reference)))


def ngram_match(candidate: List[str], reference: List[str], max_n: int = MAX_N) -> float:
    """Sentence BLEU with uniform weights, no smoothing, over orders up to the shorter length."""
    order = _effective_order(candidate, reference, max_n)
    precisions = [float(modified_precision([reference], candidate, n)) for n in range(1, order + 1)]
    penalty = brevity_penalty(closest_ref_length([reference], len(candidate)), len(candidate))
    return penalty * _geometric_mean(precisions)


def _weighted_unigram_precision(candidate: List[str], reference: List[str],
                                keywords: frozenset, keyword_weight: float) -> float:
    candidate_counts = Counter(candidate)
    reference_counts = Counter(reference)
    matched = 0.0
    total = 0.0
    for token, count in candidate_counts.items():
        weight = keyword_weight if token in keywords else 1.0
        matched += weight * min(count, reference_counts[token])
        total += weight * count
    return matched / total if total else 0.0


def weighted_ngram_match(candidate: List[str], reference: List[str], keywords: frozenset,
                         keyword_weight: float = KEYWORD_WEIGHT, max_n: int = MAX_N) -> float:
    """BLEU whose unigram precision counts keywords ``keyword_weight`` times."""
    order = _effective_order(candidate, reference, max_n)
    precisions = [_weighted_unigram_precision(candidate, reference, keywords, keyword_weight)]
    precisions += [float(modified_precision([reference], candidate, n)) for n in range(2, order + 1)]
    penalty = brevity_penalty(closest_ref_length([reference], len(candidate)), len(candidate))
    return penalty * _geometric_mean(precisions)


def _visible(node: SyntaxNode) -> List[SyntaxNode]:
    return [c for c in node.children if c.named and c.kind != COMMENT_KIND]


def _subtree_signature(node: SyntaxNode, depth: int) -> tuple:
    if depth <= 1:
        return (node.kind,)
    return (node.kind,) + tuple(_subtree_signature(child, depth - 1) for child in _visible(node))


def subtree_multiset(tree: SyntaxTree, depth: int = AST_DEPTH) -> Counter:
    """Depth-bounded signatures of every named interior node; leaf text is ignored."""
    return Counter(
        _subtree_signature(node, depth)
        for node in iter_nodes(tree.root)
        if node.named and _visible(node) and node.kind != COMMENT_KIND
    )


def ast_match(candidate: SyntaxTree, reference: SyntaxTree, depth: int = AST_DEPTH) -> Optional[float]:
    """Fraction of reference subtrees also present in the candidate (multiset)."""
    expected = subtree_multiset(reference, depth)
    if not expected:
        return None
    found = subtree_multiset(candidate, depth)
    return sum((expected & found).values()) / sum(expected.values())


def _identifier_text(tree: SyntaxTree, node: Optional[SyntaxNode]) -> Optional[str]:
    while node is not None and node.kind != "identifier":
        node = node.child_by_field("declarator") or node.child_by_field("argument")
    return tree.node_text(node).decode("utf-8", "replace") if node is not None else None


def _target_and_sources(tree: SyntaxTree, node: SyntaxNode) -> Tuple[Optional[str], Optional[SyntaxNode], bool]:
    """(defined variable, expression it is computed from, whether the old value is read)."""
    if node.kind == "assignment_expression":
        operator = node.child_by_field("operator")
        compound = operator is not None and tree.node_text(operator) != b"="
        return _identifier_text(tree, node.child_by_field("left")), node.child_by_field("right"), compound
    if node.kind == "init_declarator":
        return _identifier_text(tree, node.child_by_field("declarator")), node.child_by_field("value"), False
    return _identifier_text(tree, node.child_by_field("argument")), None, True


def dataflow_edges(tree: SyntaxTree) -> Counter:
    """Name-normalized ``(defined, used)`` edges of every assignment, initializer and update.

    Variables are renamed ``var_0``, ``var_1``, ... in order of first
    appearance, so edges compare across differently named but equivalent code.
    """
    names: Dict[str, str] = {}

    def normal(name: str) -> str:
        return names.setdefault(name, f"var_{len(names)}")

    for node in iter_nodes(tree.root):
        if node.kind == "identifier":
            normal(tree.node_text(node).decode("utf-8", "replace"))

    edges: Counter = Counter()
    for node in iter_nodes(tree.root):
        if node.kind not in _DEFINING_KINDS:
            continue
        target, source, reads_self = _target_and_sources(tree, node)
        if target is None:
            continue
        used = []
        if source is not None:
            used = [tree.node_text(n).decode("utf-8", "replace") for n in iter_nodes(source) if n.kind == "identifier"]
        if reads_self:
            used.append(target)
        for name in used:
            edges[(normal(target), normal(name))] += 1
    return edges


def dataflow_match(candidate: SyntaxTree, reference: SyntaxTree) -> Optional[float]:
    """Fraction of reference def-use edges also present in the candidate (multiset)."""
    expected = dataflow_edges(reference)
    if not expected:
        return None
    found = dataflow_edges(candidate)
    return sum((expected & found).values()) / sum(expected.values())


def combine(components: Sequence[Optional[float]], weights: Sequence[float]) -> float:
    """Weighted sum with weights of undefined components redistributed proportionally."""
    defined = [(score, weight) for score, weight in zip(components, weights) if score is not None]
    total_weight = sum(weight for _, weight in defined)
    if total_weight == 0:
        return 0.0
    return min(1.0, max(0.0, sum(score * weight for score, weight in defined) / total_weight))


def codebleu(candidate: str, reference: str, language: Language = Language.C,
             weights: Sequence[float] = DEFAULT_WEIGHTS, max_n: int = MAX_N,
             keyword_weight: float = KEYWORD_WEIGHT, ast_depth: int = AST_DEPTH) -> CodeBleuScore:
    """Score a candidate against one reference.

    Args:
        candidate: Generated code
        reference: Ground-truth code
        language: Grammar and keyword set
        weights: Component weights (ngram, weighted ngram, AST, dataflow), summing to 1
        max_n: Highest n-gram order
        keyword_weight: Unigram weight of language keywords
        ast_depth: Depth bound of compared subtrees

    Returns:
        CodeBleuScore with per-component and combined scores

    Raises:
        TokenizeFailure: If either side has no tokens
    """
    if len(weights) != 4 or not math.isclose(sum(weights), 1.0, abs_tol=1e-6):
        raise ValueError(f"weights must be four values summing to 1, got {tuple(weights)}")
    candidate_tree = parse_source(candidate, language)
    reference_tree = parse_source(reference, language)
    candidate_tokens = tokenize_source(candidate, language, candidate_tree)
    reference_tokens = tokenize_source(reference, language, reference_tree)
    if not candidate_tokens:
        raise TokenizeFailure("candidate has no tokens")
    if not reference_tokens:
        raise TokenizeFailure("reference has no tokens")

    components = (
        ngram_match(candidate_tokens, reference_tokens, max_n),
        weighted_ngram_match(candidate_tokens, reference_tokens, KEYWORDS[language], keyword_weight, max_n),
        ast_match(candidate_tree, reference_tree, ast_depth),
        dataflow_match(candidate_tree, reference_tree),
    )
    combined = combine(components, weights)
    logger.debug(f"codebleu components {components} combined {combined:.4f}")
    return CodeBleuScore(*components, combined=combined, weights=tuple(weights))

