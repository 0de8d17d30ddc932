"""Predictions read from a JSONL file."""

import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import jsonlines

from ...errors import EndpointUnreachable
from ...ompdata.dataset import LoopSample
from ...utils.config_manager import HarnessConfig
from .base import ModelEndpoint

logger = logging.getLogger(__name__)


class OfflineModel(ModelEndpoint):
    """Replays precomputed predictions keyed by sample id.

    Each line is ``{"id": str, "pragma": str|null}`` with optional
    ``"parallelizable"`` and ``"score"``; a record with a pragma and no
    ``parallelizable`` field counts as positive. External tools' outputs can be
    evaluated this way.
    """

    def __init__(self, path: Union[Path, str], config: Optional[HarnessConfig] = None):
        super().__init__(config)
        self.path = Path(path)
        self.name = f"offline:{self.path}"
        self._records: Dict[str, dict] = {}

    def connect(self) -> None:
        if self._connection:
            return
        if not self.path.exists():
            raise FileNotFoundError(f"Predictions file not found: {self.path}")
        with jsonlines.open(self.path) as reader:
            for record in reader:
                if record.get("id") in self._records:
                    logger.warning(f"duplicate prediction for {record['id']} in {self.path}; keeping the last")
                self._records[record["id"]] = record
        logger.info(f"loaded {len(self._records)} predictions from {self.path}")
        self._connection = self.path

    def disconnect(self) -> None:
        self._records = {}
        self._connection = None

    def _record(self, sample: LoopSample) -> dict:
        if not self._connection:
            self.connect()
        try:
            return self._records[sample.id]
        except KeyError:
            raise EndpointUnreachable(f"{self.path} has no prediction for sample {sample.id}")

    def classify(self, sample: LoopSample) -> Tuple[bool, float]:
        record = self._record(sample)
        positive = bool(record.get("parallelizable", record.get("pragma") is not None))
        return positive, float(record.get("score", 1.0 if positive else 0.0))

    def generate(self, sample: LoopSample) -> str:
        return self._record(sample).get("pragma") or ""
