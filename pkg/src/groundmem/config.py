"""Service configuration: defaults, key-value file, flag overrides.

Precedence, lowest to highest: built-in defaults, the ``--config`` file,
command-line flags. Provider endpoint settings always come from the
environment (see providers module). Validation failures name the
offending key.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

from .embeddings import DEFAULT_CHUNK_CHARS
from .expansion import ExpansionParams
from .models import GroundMemError
from .perception import PerceptionParams
from .providers import ProviderSettings

SNAPSHOT_FILENAME = "snapshot.json"


class ConfigError(GroundMemError):
    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "memdata"
    host: str = "127.0.0.1"
    port: int = 8377
    top_k: int = 8
    chunk_chars: int = DEFAULT_CHUNK_CHARS
    sample_rate_hz: float = 3.0
    every_nth: int = 5
    window_size: int = 3
    damping: float = 0.85
    tol: float = 1e-8
    max_iter: int = 100
    top_m: int = 10
    frontend_dir: str = ""
    provider: ProviderSettings = field(default_factory=ProviderSettings)

    @property
    def snapshot_path(self) -> str:
        return os.path.join(self.data_dir, SNAPSHOT_FILENAME)

    def perception_params(self) -> PerceptionParams:
        return PerceptionParams(
            sample_rate_hz=self.sample_rate_hz,
            every_nth=self.every_nth,
            window_size=self.window_size,
        )

    def expansion_params(self) -> ExpansionParams:
        return ExpansionParams(
            damping=self.damping, tol=self.tol, max_iter=self.max_iter, top_m=self.top_m
        )

    def validate(self) -> None:
        if not self.data_dir:
            raise ConfigError("data_dir", "must be non-empty")
        if not (1 <= self.port <= 65535):
            raise ConfigError("port", f"must be in 1..65535, got {self.port}")
        if self.top_k < 1:
            raise ConfigError("top_k", f"must be >= 1, got {self.top_k}")
        if self.chunk_chars < 32:
            raise ConfigError("chunk_chars", f"must be >= 32, got {self.chunk_chars}")
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz", f"must be positive, got {self.sample_rate_hz}")
        if self.every_nth < 1:
            raise ConfigError("every_nth", f"must be >= 1, got {self.every_nth}")
        if self.window_size < 2:
            raise ConfigError("window_size", f"must be >= 2, got {self.window_size}")
        if not (0.0 < self.damping < 1.0):
            raise ConfigError("damping", f"must be in (0, 1), got {self.damping}")
        if self.tol <= 0:
            raise ConfigError("tol", f"must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError("max_iter", f"must be >= 1, got {self.max_iter}")
        if self.top_m < 0:
            raise ConfigError("top_m", f"must be >= 0, got {self.top_m}")


_INT_KEYS = {"port", "top_k", "chunk_chars", "every_nth", "window_size", "max_iter", "top_m"}
_FLOAT_KEYS = {"sample_rate_hz", "damping", "tol"}
_STR_KEYS = {"data_dir", "host", "frontend_dir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def _coerce(key: str, value: str) -> object:
    if key in _STR_KEYS:
        return value
    try:
        if key in _INT_KEYS:
            return int(value)
        return float(value)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(key, f"expected {kind}, got {value!r}") from None


def parse_config_file(path: str) -> dict[str, object]:
    """Read ``key = value`` lines; '#' starts a comment, blank lines skipped."""
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    values: dict[str, object] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{line_no}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(key, f"unknown key at {path}:{line_no}")
        values[key] = _coerce(key, value)
    return values


def load_config(
    config_file: str | None = None, overrides: dict[str, object] | None = None
) -> ServiceConfig:
    """Build a validated config from defaults, file, and flag overrides."""
    config = ServiceConfig(provider=ProviderSettings.from_env())
    if config_file:
        config = replace(config, **parse_config_file(config_file))  # type: ignore[arg-type]
    if overrides:
        known = {f.name for f in fields(ServiceConfig)}
        for key in overrides:
            if key not in known:
                raise ConfigError(key, "unknown override")
        config = replace(config, **overrides)  # type: ignore[arg-type]
    config.validate()
    return config
