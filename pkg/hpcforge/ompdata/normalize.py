"""Canonical form of loop pragmas."""

import enum
import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

from ..errors import ClauseConflict, Unnormalizable
from ..parsing.omp import (
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
)

logger = logging.getLogger(__name__)


class Base(str, enum.Enum):
    PARALLEL_FOR = "parallel for"
    TARGET_TEAMS_DISTRIBUTE_PARALLEL_FOR = "target teams distribute parallel for"
    PARALLEL = "parallel"
    FOR = "for"


_TARGET_PREFIX = ("target", "teams", "distribute")


@dataclass(frozen=True)
class NormalizedPragma:
    """Loop pragma reduced to base directive, simd flag, private set and reduction."""

    base: Base = Base.PARALLEL_FOR
    simd: bool = False
    private_vars: FrozenSet[str] = frozenset()
    reduction: Optional[Tuple[str, FrozenSet[str]]] = None

    def __post_init__(self):
        if self.reduction is not None:
            op, names = self.reduction
            if not names:
                raise ValueError("reduction needs at least one variable")
            both = self.private_vars & names
            if both:
                raise ClauseConflict(f"variables {sorted(both)} are both private and reduction")

    @property
    def reduction_op(self) -> Optional[str]:
        return self.reduction[0] if self.reduction else None

    @property
    def reduction_vars(self) -> FrozenSet[str]:
        return self.reduction[1] if self.reduction else frozenset()

    @property
    def is_target(self) -> bool:
        return self.base is Base.TARGET_TEAMS_DISTRIBUTE_PARALLEL_FOR

    @property
    def is_plain(self) -> bool:
        return not (self.simd or self.private_vars or self.reduction)

    def shape(self) -> str:
        """Clause shape without variables, e.g. ``parallel for simd reduction``."""
        parts = [self.base.value]
        if self.simd:
            parts.append("simd")
        if self.private_vars:
            parts.append("private")
        if self.reduction:
            parts.append("reduction")
        return " ".join(parts)

    def render(self) -> str:
        parts = ["#pragma omp", self.base.value]
        if self.simd:
            parts.append("simd")
        if self.private_vars:
            parts.append(f"private({', '.join(sorted(self.private_vars))})")
        if self.reduction:
            op, names = self.reduction
            parts.append(f"reduction({op}:{', '.join(sorted(names))})")
        return " ".join(parts)


def _base_for(pragma: OmpPragma) -> Base:
    if pragma.directive is Directive.PARALLEL_FOR:
        return Base.PARALLEL_FOR
    if pragma.directive is Directive.FOR:
        return Base.FOR
    if pragma.directive is Directive.PARALLEL:
        return Base.PARALLEL
    if pragma.directive_words[:3] == _TARGET_PREFIX:
        return Base.TARGET_TEAMS_DISTRIBUTE_PARALLEL_FOR
    raise Unnormalizable(f"directive {' '.join(pragma.directive_words)!r} is not a supported loop directive")


def normalize_pragma(pragma: OmpPragma) -> NormalizedPragma:
    """Reduce a parsed pragma to its canonical form.

    ``firstprivate`` and ``lastprivate`` merge into the private set; every
    ``target teams distribute ...`` form collapses to the target base. Other
    clauses are dropped and logged.

    Raises:
        Unnormalizable: If the directive is not a loop directive
        ClauseConflict: If a variable is both private and reduction
    """
    base = _base_for(pragma)
    simd = False
    private: set = set()
    reduction_op: Optional[str] = None
    reduction_vars: set = set()
    for clause in pragma.clauses:
        if isinstance(clause, (Private, FirstPrivate, LastPrivate)):
            private.update(clause.vars)
        elif isinstance(clause, Reduction):
            if reduction_op is not None and clause.op != reduction_op:
                logger.warning(f"dropping second reduction operator {clause.op!r} "
                               f"(keeping {reduction_op!r}) in {pragma.raw_text!r}")
                continue
            reduction_op = clause.op
            reduction_vars.update(clause.vars)
        elif isinstance(clause, Simd):
            simd = True
        elif isinstance(clause, (Schedule, NumThreads)):
            logger.debug(f"dropping {type(clause).__name__} clause from {pragma.raw_text!r}")
        elif isinstance(clause, Other):
            logger.warning(f"dropping unsupported clause {clause.raw!r} from {pragma.raw_text!r}")
    reduction = (reduction_op, frozenset(reduction_vars)) if reduction_op else None
    return NormalizedPragma(base=base, simd=simd, private_vars=frozenset(private), reduction=reduction)


def merge_stacked(outer: NormalizedPragma, inner: NormalizedPragma) -> NormalizedPragma:
    """Combine ``parallel`` followed by ``for`` on the same loop into ``parallel for``."""
    if {outer.base, inner.base} != {Base.PARALLEL, Base.FOR}:
        return inner
    ops = {p.reduction_op for p in (outer, inner) if p.reduction}
    if len(ops) > 1:
        logger.warning(f"stacked pragmas use different reduction operators {sorted(ops)}; keeping the inner one")
        reduction = inner.reduction
    elif ops:
        reduction = (ops.pop(), outer.reduction_vars | inner.reduction_vars)
    else:
        reduction = None
    return NormalizedPragma(
        base=Base.PARALLEL_FOR,
        simd=outer.simd or inner.simd,
        private_vars=outer.private_vars | inner.private_vars,
        reduction=reduction,
    )


def parse_normalized(text: str) -> NormalizedPragma:
    """Parse and normalize pragma text in one step."""
    return normalize_pragma(parse_omp_pragma(text))
