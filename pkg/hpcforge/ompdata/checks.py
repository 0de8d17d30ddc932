"""Static checks on ``for`` loops.

These cover the failure classes seen in automatic parallelizers: loops not in
canonical form, early exits from the loop body, and variables listed as both
private and reduction.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from ..parsing.omp import FirstPrivate, LastPrivate, OmpPragma, Private, Reduction, parse_omp_pragma
from ..parsing.sites import LOOP_KIND
from ..parsing.source import Language, SyntaxNode, SyntaxTree, find_all, iter_nodes, parse_source

logger = logging.getLogger(__name__)

NON_CANONICAL = "non_canonical"
EARLY_EXIT = "early_exit"
CLAUSE_CONFLICT = "private_reduction_conflict"

_RELATIONAL = frozenset({"<", "<=", ">", ">=", "!="})
_LOOP_KINDS = frozenset({"for_statement", "while_statement", "do_statement", "for_range_loop"})
_BREAK_SCOPES = _LOOP_KINDS | {"switch_statement"}
_COMPOUND_OPS = {"+=": "+", "-=": "-", "*=": "*", "&=": "&", "|=": "|", "^=": "^"}
_BINARY_REDUCTION = frozenset({"+", "*", "&", "|", "^", "&&", "||"})
_MINMAX_CALLS = {"fmax": "max", "fmaxf": "max", "max": "max", "fmin": "min", "fminf": "min", "min": "min"}
# Calls that neither write memory nor perform I/O.
PURE_CALLS = frozenset({
    "sqrt", "sqrtf", "sin", "sinf", "cos", "cosf", "tan", "exp", "expf", "log", "logf", "log2", "log10",
    "pow", "powf", "fabs", "fabsf", "abs", "labs", "floor", "floorf", "ceil", "ceilf", "fmax", "fmaxf",
    "fmin", "fminf", "min", "max", "atan", "atan2", "tanh", "erf", "round", "trunc", "fmod",
})


def _text(tree: SyntaxTree, node: Optional[SyntaxNode]) -> str:
    return tree.node_text(node).decode("utf-8", "replace") if node is not None else ""


def _strip_parens(node: Optional[SyntaxNode]) -> Optional[SyntaxNode]:
    while node is not None and node.kind == "parenthesized_expression":
        named = node.named_children()
        node = named[0] if named else None
    return node


def _operator(tree: SyntaxTree, node: SyntaxNode) -> str:
    return _text(tree, node.child_by_field("operator"))


def induction_variable(tree: SyntaxTree, loop: SyntaxNode) -> Optional[str]:
    """The loop's induction variable if the header has canonical form.

    Canonical: ``init`` assigns or declares one variable, the test compares it
    with a relational operator against an expression free of casts and calls,
    and the increment is ``++``, ``--``, ``+=``, ``-=`` or ``v = v +/- expr``.
    """
    init = loop.child_by_field("initializer")
    condition = _strip_parens(loop.child_by_field("condition"))
    update = _strip_parens(loop.child_by_field("update"))
    if init is None or condition is None or update is None:
        return None

    name = None
    if init.kind == "declaration":
        declarators = [c for c in init.children if c.field == "declarator"]
        if len(declarators) == 1 and declarators[0].kind == "init_declarator":
            target = declarators[0].child_by_field("declarator")
            name = _text(tree, target) if target is not None and target.kind == "identifier" else None
    elif init.kind == "assignment_expression" and _operator(tree, init) == "=":
        left = init.child_by_field("left")
        name = _text(tree, left) if left is not None and left.kind == "identifier" else None
    if name is None:
        return None

    if condition.kind != "binary_expression" or _operator(tree, condition) not in _RELATIONAL:
        return None
    if any(n.kind in ("cast_expression", "call_expression") for n in iter_nodes(condition)):
        return None
    sides = [_strip_parens(condition.child_by_field("left")), _strip_parens(condition.child_by_field("right"))]
    if not any(s is not None and s.kind == "identifier" and _text(tree, s) == name for s in sides):
        return None

    if update.kind == "update_expression":
        operand = update.child_by_field("argument")
        return name if operand is not None and _text(tree, operand) == name else None
    if update.kind == "assignment_expression":
        left = update.child_by_field("left")
        if left is None or _text(tree, left) != name:
            return None
        op = _operator(tree, update)
        if op in ("+=", "-="):
            return name
        right = _strip_parens(update.child_by_field("right"))
        if op == "=" and right is not None and right.kind == "binary_expression" and _operator(tree, right) in ("+", "-"):
            operands = [_text(tree, right.child_by_field("left")), _text(tree, right.child_by_field("right"))]
            return name if name in operands else None
    return None


def _escapes(tree: SyntaxTree, body: SyntaxNode) -> List[str]:
    """``return``/``goto`` anywhere and ``break`` not enclosed by an inner loop or switch."""
    found = []
    stack: List[Tuple[SyntaxNode, bool]] = [(body, False)]
    while stack:
        node, shielded = stack.pop()
        if node.kind in ("return_statement", "goto_statement"):
            found.append(node.kind)
        elif node.kind == "break_statement" and not shielded:
            found.append(node.kind)
        inner = shielded or node.kind in _BREAK_SCOPES
        stack.extend((child, inner) for child in node.children)
    return found


@dataclass
class LoopAnalysis:
    """Scalar write summary of a loop."""

    induction_var: Optional[str]
    local_names: Set[str] = field(default_factory=set)
    inner_induction_vars: Set[str] = field(default_factory=set)
    outer_writes: Set[str] = field(default_factory=set)
    reductions: Dict[str, str] = field(default_factory=dict)
    escapes: List[str] = field(default_factory=list)
    unsafe_calls: Set[str] = field(default_factory=set)

    @property
    def canonical(self) -> bool:
        return self.induction_var is not None


def _declared_in(tree: SyntaxTree, node: SyntaxNode) -> Set[str]:
    names = set()
    for declaration in find_all(node, "declaration") + ([node] if node.kind == "declaration" else []):
        for child in declaration.children:
            if child.field != "declarator":
                continue
            current = child
            while current is not None and current.kind != "identifier":
                inner = current.child_by_field("declarator")
                current = inner if inner is not None else (current.named_children() or [None])[0]
            if current is not None:
                names.add(_text(tree, current))
    return names


def _reduction_op(tree: SyntaxTree, write: SyntaxNode, name: str) -> Optional[str]:
    """Operator if ``write`` has the form ``s op= e`` or ``s = s op e``/``s = max(s, e)``."""
    if write.kind != "assignment_expression":
        return None
    op = _operator(tree, write)
    right = _strip_parens(write.child_by_field("right"))
    right_names = [n for n in iter_nodes(right) if n.kind == "identifier" and _text(tree, n) == name] if right else []
    if op in _COMPOUND_OPS:
        return _COMPOUND_OPS[op] if not right_names else None
    if op != "=" or right is None or len(right_names) != 1:
        return None
    if right.kind == "binary_expression" and _operator(tree, right) in _BINARY_REDUCTION:
        left_side = _strip_parens(right.child_by_field("left"))
        right_side = _strip_parens(right.child_by_field("right"))
        if any(s is not None and s.kind == "identifier" and _text(tree, s) == name for s in (left_side, right_side)):
            return _operator(tree, right)
    if right.kind == "binary_expression" and _operator(tree, right) == "-":
        left_side = _strip_parens(right.child_by_field("left"))
        if left_side is not None and left_side.kind == "identifier" and _text(tree, left_side) == name:
            return "-"
    if right.kind == "call_expression":
        callee = _text(tree, right.child_by_field("function"))
        if callee in _MINMAX_CALLS:
            return _MINMAX_CALLS[callee]
    return None


def _mentions(tree: SyntaxTree, node: SyntaxNode, name: str) -> int:
    return sum(1 for n in iter_nodes(node) if n.kind == "identifier" and _text(tree, n) == name)


def analyze_loop(tree: SyntaxTree, loop: SyntaxNode) -> LoopAnalysis:
    """Summarize scalar writes, early exits and calls of a ``for`` loop."""
    analysis = LoopAnalysis(induction_variable(tree, loop))
    body = loop.child_by_field("body")
    if body is None:
        return analysis
    analysis.escapes = _escapes(tree, body)
    analysis.local_names = _declared_in(tree, body)
    if analysis.induction_var:
        analysis.local_names.add(analysis.induction_var)

    for inner in find_all(body, LOOP_KIND):
        name = induction_variable(tree, inner)
        if name:
            analysis.inner_induction_vars.add(name)
            initializer = inner.child_by_field("initializer")
            if initializer is not None and initializer.kind == "declaration":
                analysis.local_names.add(name)

    writes: Dict[str, List[SyntaxNode]] = {}
    for node in iter_nodes(body):
        target = None
        if node.kind == "assignment_expression":
            target = _strip_parens(node.child_by_field("left"))
        elif node.kind == "update_expression":
            target = _strip_parens(node.child_by_field("argument"))
        elif node.kind == "call_expression":
            callee = _text(tree, node.child_by_field("function"))
            if callee not in PURE_CALLS:
                analysis.unsafe_calls.add(callee)
        if target is not None and target.kind == "identifier":
            writes.setdefault(_text(tree, target), []).append(node)

    for name, nodes in writes.items():
        if name in analysis.local_names:
            continue
        analysis.outer_writes.add(name)
        if name in analysis.inner_induction_vars:
            continue
        ops = {_reduction_op(tree, n, name) for n in nodes}
        # Every mention of the variable must sit inside one of its reduction updates.
        mentions = _mentions(tree, body, name)
        in_updates = sum(_mentions(tree, n, name) for n in nodes)
        if len(ops) == 1 and None not in ops and mentions == in_updates:
            analysis.reductions[name] = ops.pop()
    return analysis


@dataclass(frozen=True)
class LoopCheck:
    issues: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues


def _loop_node(tree: SyntaxTree) -> Optional[SyntaxNode]:
    loops = [n for n in iter_nodes(tree.root) if n.kind == LOOP_KIND]
    return loops[0] if loops else None


def check_loop(loop_code: Union[str, bytes], pragma: Union[OmpPragma, str, None] = None,
               language: Language = Language.C) -> LoopCheck:
    """Report why a loop (with an optional pragma) is unsafe to parallelize.

    Args:
        loop_code: Text of a ``for`` statement
        pragma: Pragma proposed for the loop
        language: Source language

    Returns:
        LoopCheck listing issue tags; empty means no problem was found
    """
    tree = parse_source(loop_code, language)
    loop = _loop_node(tree)
    if loop is None:
        return LoopCheck((NON_CANONICAL,))
    issues = []
    analysis = analyze_loop(tree, loop)
    if not analysis.canonical:
        issues.append(NON_CANONICAL)
    if analysis.escapes:
        issues.append(EARLY_EXIT)
    if isinstance(pragma, str):
        pragma = parse_omp_pragma(pragma)
    if pragma is not None:
        private = {v for c in pragma.clauses if isinstance(c, (Private, FirstPrivate, LastPrivate)) for v in c.vars}
        reduced = {v for c in pragma.clauses if isinstance(c, Reduction) for v in c.vars}
        if private & reduced:
            issues.append(CLAUSE_CONFLICT)
    return LoopCheck(tuple(issues))
