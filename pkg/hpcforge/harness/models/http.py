"""HTTP+JSON model endpoint."""

import logging
import time
from typing import Any, Dict, Optional, Tuple

import httpx

from ...errors import EndpointUnreachable, InvalidGeneration
from ...ompdata.dataset import LoopSample
from ...utils.config_manager import HarnessConfig
from .base import ModelEndpoint

logger = logging.getLogger(__name__)

CLASSIFY_PATH = "/v1/classify"
GENERATE_PATH = "/v1/generate"


class HttpModel(ModelEndpoint):
    """Model served over HTTP.

    Protocol::

        POST /v1/classify {"code": str} -> {"parallelizable": bool, "score": float}
        POST /v1/generate {"code": str} -> {"pragma": str}

    Transport errors and 5xx responses are retried ``config.retries`` times with
    exponential backoff starting at ``config.backoff_s``.
    """

    def __init__(self, base_url: str, config: Optional[HarnessConfig] = None,
                 token: Optional[str] = None, transport: Optional[httpx.BaseTransport] = None):
        """Initialize the HTTP endpoint.

        Args:
            base_url: Server root, e.g. ``http://localhost:8000``
            config: Harness configuration; ``model_token`` is used when ``token`` is omitted
            token: Bearer token (highest priority)
            transport: Optional httpx transport, for tests
        """
        super().__init__(config)
        self.base_url = base_url.rstrip("/")
        self.name = self.base_url
        self.token = token or self.config.model_token
        self._transport = transport

    def connect(self) -> None:
        """Open the HTTP client."""
        if self._connection:
            return
        headers = {"Accept": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        self._connection = httpx.Client(
            base_url=self.base_url,
            headers=headers,
            timeout=self.config.timeout_s,
            transport=self._transport,
        )

    def disconnect(self) -> None:
        """Close the HTTP client."""
        if self._connection:
            self._connection.close()
            self._connection = None

    def _post(self, path: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        if not self._connection:
            self.connect()
        attempts = self.config.retries + 1
        last_error: Optional[Exception] = None
        for attempt in range(attempts):
            try:
                response = self._connection.post(path, json=payload)
                if response.status_code >= 500:
                    raise httpx.HTTPStatusError(
                        f"server error {response.status_code}", request=response.request, response=response
                    )
                response.raise_for_status()
                try:
                    return response.json()
                except ValueError as e:
                    raise InvalidGeneration(f"{self.base_url}{path} returned non-JSON body: {e}")
            except httpx.HTTPStatusError as e:
                if e.response.status_code < 500:
                    raise EndpointUnreachable(f"{self.base_url}{path} rejected the request: {e}")
                last_error = e
            except httpx.TransportError as e:
                last_error = e
            if attempt + 1 < attempts:
                delay = self.config.backoff_s * (2 ** attempt)
                logger.warning(f"{self.base_url}{path} failed ({last_error}); retry {attempt + 1} in {delay:.2f}s")
                time.sleep(delay)
        raise EndpointUnreachable(f"{self.base_url}{path} failed after {attempts} attempts: {last_error}")

    def classify(self, sample: LoopSample) -> Tuple[bool, float]:
        body = self._post(CLASSIFY_PATH, {"code": sample.loop_code})
        try:
            return bool(body["parallelizable"]), float(body.get("score", 1.0 if body["parallelizable"] else 0.0))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidGeneration(f"malformed classify response {body!r}: {e}")

    def generate(self, sample: LoopSample) -> str:
        body = self._post(GENERATE_PATH, {"code": sample.loop_code})
        pragma = body.get("pragma") if isinstance(body, dict) else None
        if not isinstance(pragma, str):
            raise InvalidGeneration(f"malformed generate response {body!r}")
        return pragma
