"""Configuration manager with layered priority for hpcforge."""

import logging
import os
import platform
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import keyring
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ConfigError, KeychainUnavailable
from ..parsing.source import Language

logger = logging.getLogger(__name__)

ENV_PREFIX = "HPCFORGE"
CREDENTIAL_KEYS = {("harness", "model_token")}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PathConfig(_Section):
    output_dir: Path = Path(".")


class TokompilerConfig(_Section):
    """Anonymizer settings."""

    suffix_range_max: int = Field(1000, ge=1)
    auto_extend: bool = False
    anonymize_chars: bool = True


class CorpusConfig(_Section):
    """Corpus curation settings."""

    roots: List[Path] = Field(default_factory=list)
    extensions: Dict[str, Language] = Field(
        default_factory=lambda: {
            ".c": Language.C, ".h": Language.C,
            ".cc": Language.CPP, ".cpp": Language.CPP, ".cxx": Language.CPP, ".hpp": Language.CPP,
        }
    )
    min_tokens: int = Field(100, ge=0)
    max_bytes: int = Field(1_048_576, gt=0)
    per_function_filter: bool = False
    anonymize: bool = False
    emit_tokens: bool = False
    max_parse_errors: int = Field(0, ge=0)


class OmpDataConfig(_Section):
    balance: bool = True
    neg_ratio: float = Field(1.0, ge=0.0)


class MetricsConfig(_Section):
    """CodeBLEU constants."""

    weights: Tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    keyword_weight: float = Field(5.0, gt=0.0)
    max_n: int = Field(4, ge=1)
    ast_depth: int = Field(3, ge=1)

    @field_validator("weights")
    @classmethod
    def _weights_sum_to_one(cls, value: Tuple[float, float, float, float]):
        if any(w < 0 for w in value) or abs(sum(value) - 1.0) > 1e-6:
            raise ValueError(f"CodeBLEU weights must be non-negative and sum to 1, got {value}")
        return value


class HarnessConfig(_Section):
    """Compile-and-run and model endpoint settings."""

    timeout_s: float = Field(600.0, gt=0.0)
    repeats: int = Field(3, ge=1)
    compare: Literal["exact", "numeric"] = "exact"
    rel_epsilon: float = Field(1e-6, ge=0.0)
    retries: int = Field(3, ge=0)
    backoff_s: float = Field(0.5, ge=0.0)
    max_in_flight: int = Field(4, ge=1)
    baseline: Literal["default", "threads1"] = "default"
    threads: List[int] = Field(default_factory=lambda: [1, 4, 8, 16])
    model_token: Optional[str] = Field(None, repr=False)

    @field_validator("threads")
    @classmethod
    def _positive_threads(cls, value: List[int]):
        if not value or any(t < 1 for t in value):
            raise ValueError(f"thread counts must be positive, got {value}")
        return value


class ToolchainConfig(_Section):
    cc: str = "gcc"
    cxx: str = "g++"
    openmp_flag: str = "-fopenmp"


class GlobalConfig(_Section):
    """Validated configuration shared by every subcommand."""

    seed: int = Field(0, ge=0, lt=2**64)
    language: Language = Language.C
    jobs: int = Field(1, ge=1)
    paths: PathConfig = Field(default_factory=PathConfig)
    tokompiler: TokompilerConfig = Field(default_factory=TokompilerConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    ompdata: OmpDataConfig = Field(default_factory=OmpDataConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    harness: HarnessConfig = Field(default_factory=HarnessConfig)
    toolchain: ToolchainConfig = Field(default_factory=ToolchainConfig)


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """Manages configuration with the following priority order:
    1. Function parameters / command-line flags (highest priority)
    2. Environment variables (``HPCFORGE_<SECTION>_<KEY>``, ``.env`` honoured)
    3. Keychain (credentials only, macOS only)
    4. User config file (JSON or YAML)
    5. Package config.yaml defaults (lowest priority)
    """

    def __init__(self, config_path: Optional[Path] = None, service_name: str = "hpcforge",
                 env_file: Optional[Path] = None):
        """Initialize configuration manager.

        Args:
            config_path: Optional user config file (JSON or YAML)
            service_name: Service name for keychain storage
            env_file: Optional ``.env`` file; defaults to python-dotenv's search
        """
        self.config_path = Path(config_path) if config_path else None
        self.service_name = service_name
        self.is_macos = platform.system() == "Darwin"
        self._default_config: Optional[Dict[str, Any]] = None
        self._user_config: Optional[Dict[str, Any]] = None
        load_dotenv(env_file, override=False)

    def get_default_config_path(self) -> Path:
        """Get path to the default config file in the package."""
        return Path(__file__).parent.parent / "config.yaml"

    def _load_default_config(self) -> Dict[str, Any]:
        """Load default configuration from YAML file (cached)."""
        if self._default_config is None:
            config_path = self.get_default_config_path()
            if not config_path.exists():
                self._default_config = {}
            else:
                with open(config_path, "r") as f:
                    self._default_config = yaml.safe_load(f) or {}
        return self._default_config

    def _load_user_config(self) -> Dict[str, Any]:
        """Load the user config file; JSON is a subset of YAML so one loader reads both."""
        if self._user_config is None:
            if self.config_path is None:
                self._user_config = {}
            else:
                try:
                    with open(self.config_path, "r") as f:
                        loaded = yaml.safe_load(f) or {}
                except (OSError, yaml.YAMLError) as e:
                    raise ConfigError(f"Cannot read config file {self.config_path}: {e}")
                if not isinstance(loaded, dict):
                    raise ConfigError(f"Config file {self.config_path} must contain a mapping")
                self._user_config = loaded
        return self._user_config

    def _get_credential_from_keychain(self, key: str) -> Optional[str]:
        """Get credential from keychain (macOS only).

        Args:
            key: Credential key name (e.g., 'HPCFORGE_HARNESS_MODEL_TOKEN')

        Returns:
            Credential value or None if not found
        """
        if not self.is_macos:
            return None
        try:
            return keyring.get_password(self.service_name, key.lower())
        except Exception:
            return None

    def env_key(self, section: Optional[str], key: str) -> str:
        """Environment variable name of a key; credentials use it as their keychain name too."""
        if section is None:
            return f"{ENV_PREFIX}_{key.upper()}"
        return f"{ENV_PREFIX}_{section.upper()}_{key.upper()}"

    def get_config_value(self, section: Optional[str], key: str,
                         function_config: Optional[Dict[str, Any]] = None,
                         is_credential: bool = False) -> Any:
        """Get configuration value following priority order.

        Args:
            section: Config section ('tokompiler', 'harness', ...) or None for top-level keys
            key: Configuration key
            function_config: Configuration passed to function (highest priority)
            is_credential: Whether this is a credential (token)

        Returns:
            Configuration value or None
        """
        # 1. Function parameters (highest priority)
        if function_config and key in function_config:
            return function_config[key]

        # 2. Environment variables, parsed as YAML scalars so "1000" -> 1000, "true" -> True
        env_key = self.env_key(section, key)
        env_value = os.getenv(env_key)
        if env_value:
            return yaml.safe_load(env_value) if not is_credential else env_value

        # 3. Keychain (credentials only, macOS only)
        if is_credential:
            keychain_value = self._get_credential_from_keychain(env_key)
            if keychain_value:
                return keychain_value

        # 4./5. User config file, then package defaults
        for layer in (self._load_user_config(), self._load_default_config()):
            scope = layer if section is None else layer.get(section, {}) or {}
            if key in scope:
                return scope[key]
        return None

    def _env_overrides(self) -> Dict[str, Any]:
        """Collect environment overrides for every key known to GlobalConfig."""
        overrides: Dict[str, Any] = {}
        for name, field in GlobalConfig.model_fields.items():
            annotation = field.annotation
            if isinstance(annotation, type) and issubclass(annotation, BaseModel):
                for key in annotation.model_fields:
                    is_credential = (name, key) in CREDENTIAL_KEYS
                    env_key = self.env_key(name, key)
                    value = os.getenv(env_key)
                    if not value and is_credential:
                        value = self._get_credential_from_keychain(env_key)
                    if value:
                        parsed = value if is_credential else yaml.safe_load(value)
                        overrides.setdefault(name, {})[key] = parsed
            else:
                value = os.getenv(self.env_key(None, name))
                if value:
                    overrides[name] = yaml.safe_load(value)
        return overrides

    def get_global_config(self, overrides: Optional[Dict[str, Any]] = None) -> GlobalConfig:
        """Merge every layer and validate.

        Args:
            overrides: Nested dict of flag-level overrides (highest priority)

        Returns:
            Validated GlobalConfig

        Raises:
            ConfigError: If any layer contains unknown keys or invalid values
        """
        merged = _deep_merge(self._load_default_config(), self._load_user_config())
        merged = _deep_merge(merged, self._env_overrides())
        merged = _deep_merge(merged, overrides or {})
        try:
            return GlobalConfig.model_validate(merged)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration: {e}")

    def set_credential(self, key: str, value: str) -> None:
        """Set credential in keychain (macOS only).

        Args:
            key: Credential key name (e.g., 'HPCFORGE_HARNESS_MODEL_TOKEN')
            value: Credential value

        Raises:
            KeychainUnavailable: If not on macOS
        """
        if not self.is_macos:
            raise KeychainUnavailable("Keychain storage only available on macOS")
        keyring.set_password(self.service_name, key.lower(), value)

    def delete_credential(self, key: str) -> None:
        """Delete credential from keychain (macOS only).

        Raises:
            KeychainUnavailable: If not on macOS
        """
        if not self.is_macos:
            raise KeychainUnavailable("Keychain deletion only available on macOS")
        keyring.delete_password(self.service_name, key.lower())
