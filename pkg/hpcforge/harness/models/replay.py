"""Ground-truth replay model."""

from typing import Optional, Tuple

from ...ompdata.dataset import LoopSample
from ...utils.config_manager import HarnessConfig
from .base import ModelEndpoint


class ReplayModel(ModelEndpoint):
    """Oracle that answers with each sample's own label.

    Single-line source pragmas are replayed as written so injected code matches
    the original benchmark; stacked pragmas are replayed as their merged label.
    """

    name = "builtin:replay"

    def __init__(self, config: Optional[HarnessConfig] = None):
        super().__init__(config)

    def connect(self) -> None:
        self._connection = self.name

    def disconnect(self) -> None:
        self._connection = None

    def classify(self, sample: LoopSample) -> Tuple[bool, float]:
        return (sample.label is not None, 1.0 if sample.label is not None else 0.0)

    def generate(self, sample: LoopSample) -> str:
        if sample.label is None:
            raise ValueError(f"sample {sample.id} has no label to replay")
        if sample.source_pragma and "\n" not in sample.source_pragma.strip():
            return sample.source_pragma.strip()
        return sample.label.render()
