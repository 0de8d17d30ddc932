"""Base class for all pragma model endpoints."""

from abc import ABC, abstractmethod
from typing import Optional, Tuple

from ...ompdata.dataset import LoopSample
from ...utils.config_manager import HarnessConfig


class ModelEndpoint(ABC):
    """Abstract base class for two-stage pragma models.

    A model first classifies a loop as parallelizable, then generates the
    pragma text for loops it classified positive.
    """

    name = "model"

    def __init__(self, config: Optional[HarnessConfig] = None):
        """Initialize the endpoint with configuration.

        Args:
            config: Harness configuration (retries, backoff, credentials)
        """
        self.config = config or HarnessConfig()
        self._connection = None

    @abstractmethod
    def connect(self) -> None:
        """Open the endpoint (HTTP client, predictions file, ...)."""
        pass

    @abstractmethod
    def disconnect(self) -> None:
        """Release the endpoint."""
        pass

    @abstractmethod
    def classify(self, sample: LoopSample) -> Tuple[bool, float]:
        """Decide whether the loop should carry a pragma.

        Args:
            sample: Loop to classify

        Returns:
            Tuple of (parallelizable, score in [0, 1])
        """
        pass

    @abstractmethod
    def generate(self, sample: LoopSample) -> str:
        """Generate pragma text for a loop classified as parallelizable.

        Args:
            sample: Loop to annotate

        Returns:
            Pragma line, e.g. ``#pragma omp parallel for reduction(+:s)``
        """
        pass

    @property
    def is_connected(self) -> bool:
        """Check if the endpoint is open."""
        return self._connection is not None

    def __enter__(self):
        self.connect()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.disconnect()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"
