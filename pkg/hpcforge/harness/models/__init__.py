"""Pragma model endpoints."""

from typing import Optional

from ...errors import ConfigError
from ...utils.config_manager import HarnessConfig
from .base import ModelEndpoint
from .heuristic import HeuristicModel
from .http import HttpModel
from .offline import OfflineModel
from .replay import ReplayModel


def load_model(spec: str, config: Optional[HarnessConfig] = None) -> ModelEndpoint:
    """Build a model from its command-line form.

    Args:
        spec: ``builtin:replay``, ``builtin:heuristic``, ``offline:<path>`` or an ``http(s)://`` URL
        config: Harness configuration

    Returns:
        An unconnected ModelEndpoint

    Raises:
        ConfigError: If the form is not recognized
    """
    if spec == "builtin:replay":
        return ReplayModel(config)
    if spec == "builtin:heuristic":
        return HeuristicModel(config)
    if spec.startswith("offline:"):
        return OfflineModel(spec[len("offline:"):], config)
    if spec.startswith(("http://", "https://")):
        return HttpModel(spec, config)
    raise ConfigError(f"Unknown model {spec!r}; expected builtin:replay, builtin:heuristic, offline:<path> or a URL")


__all__ = ["HeuristicModel", "HttpModel", "ModelEndpoint", "OfflineModel", "ReplayModel", "load_model"]
