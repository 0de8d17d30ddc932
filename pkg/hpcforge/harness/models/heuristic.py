"""Conservative rule-based model built on loop analysis."""

import logging
from typing import Dict, Optional, Tuple

from ...ompdata.checks import LoopAnalysis, analyze_loop
from ...ompdata.dataset import LoopSample
from ...ompdata.normalize import Base, NormalizedPragma
from ...parsing.sites import for_loops
from ...parsing.source import parse_source
from ...utils.config_manager import HarnessConfig
from .base import ModelEndpoint

logger = logging.getLogger(__name__)

POSITIVE_SCORE = 0.9
NEGATIVE_SCORE = 0.1


class HeuristicModel(ModelEndpoint):
    """Parallelize only loops that are provably simple.

    A loop is positive when its header is canonical, its body has no
    ``return``/``break``/``goto``, it calls only pure math functions, and every
    scalar it writes from the enclosing scope is either an inner loop index
    (made private) or a single-operator reduction.
    """

    name = "builtin:heuristic"

    def __init__(self, config: Optional[HarnessConfig] = None):
        super().__init__(config)
        self._cache: Dict[str, Optional[NormalizedPragma]] = {}

    def connect(self) -> None:
        self._connection = self.name

    def disconnect(self) -> None:
        self._connection = None
        self._cache.clear()

    def _analyze(self, sample: LoopSample) -> Optional[LoopAnalysis]:
        tree = parse_source(sample.loop_code, sample.language)
        loops = for_loops(tree)
        return analyze_loop(tree, loops[0]) if loops else None

    def decide(self, sample: LoopSample) -> Optional[NormalizedPragma]:
        """The pragma this model would emit, or ``None`` for a negative."""
        if sample.loop_code in self._cache:
            return self._cache[sample.loop_code]
        analysis = self._analyze(sample)
        pragma = None
        if analysis is None:
            reason = "no for loop"
        elif not analysis.canonical:
            reason = "non-canonical header"
        elif analysis.escapes:
            reason = f"early exit ({', '.join(sorted(set(analysis.escapes)))})"
        elif analysis.unsafe_calls:
            reason = f"calls {sorted(analysis.unsafe_calls)}"
        else:
            carried = analysis.outer_writes - analysis.inner_induction_vars - set(analysis.reductions)
            ops = set(analysis.reductions.values())
            if carried:
                reason = f"loop-carried scalars {sorted(carried)}"
            elif len(ops) > 1:
                reason = f"mixed reduction operators {sorted(ops)}"
            else:
                reason = ""
                reduction = (ops.pop(), frozenset(analysis.reductions)) if ops else None
                private = frozenset(analysis.inner_induction_vars & analysis.outer_writes)
                pragma = NormalizedPragma(Base.PARALLEL_FOR, False, private, reduction)
        if reason:
            logger.debug(f"heuristic rejects {sample.id}: {reason}")
        self._cache[sample.loop_code] = pragma
        return pragma

    def classify(self, sample: LoopSample) -> Tuple[bool, float]:
        positive = self.decide(sample) is not None
        return positive, POSITIVE_SCORE if positive else NEGATIVE_SCORE

    def generate(self, sample: LoopSample) -> str:
        pragma = self.decide(sample)
        if pragma is None:
            raise ValueError(f"sample {sample.id} was classified as not parallelizable")
        return pragma.render()
