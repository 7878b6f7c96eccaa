"""Server configuration: TOML file, environment, and flag overrides.

Precedence: CLI flag > ANNOFORGE_DATA_ROOT env var > config file > default.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional

from ..errors import ConfigError


@dataclass
class ServerConfig:
    data_root: Path = Path(".")
    host: str = "127.0.0.1"
    port: int = 8765
    lock_ttl_minutes: float = 30.0
    auto_accept_threshold: float = 0.80
    uncertain_low: float = 0.40
    uncertain_high: float = 0.60
    unpredicted_score: float = 0.15
    split_ratio: float = 0.8
    rng_seed: int = 0
    trust_auto_accept: bool = False
    job_abandon_minutes: float = 60.0
    supersample: int = 3
    ui_dir: Optional[Path] = None
    seed_models: bool = True

    def validate(self) -> "ServerConfig":
        problems = []
        if not self.uncertain_low < self.uncertain_high < self.auto_accept_threshold:
            problems.append(
                "uncertain_low < uncertain_high < auto_accept_threshold must hold "
                f"(got {self.uncertain_low}, {self.uncertain_high}, "
                f"{self.auto_accept_threshold})")
        for name in ("auto_accept_threshold", "uncertain_low", "uncertain_high",
                     "unpredicted_score"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                problems.append(f"{name} must be in [0, 1], got {value}")
        if not 0.0 < self.split_ratio < 1.0:
            problems.append(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.lock_ttl_minutes <= 0:
            problems.append(f"lock_ttl_minutes must be > 0, got {self.lock_ttl_minutes}")
        if not self.data_root.is_dir():
            problems.append(f"data_root is not a readable directory: {self.data_root}")
        if problems:
            raise ConfigError("; ".join(problems))
        return self


_PATH_FIELDS = {"data_root", "ui_dir"}


def load_config(path: Optional[Path | str] = None,
                overrides: Optional[dict[str, Any]] = None) -> ServerConfig:
    values: dict[str, Any] = {}
    if path is not None:
        try:
            doc = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(ServerConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    env_root = os.environ.get("ANNOFORGE_DATA_ROOT")
    if env_root:
        values["data_root"] = env_root
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    for key in _PATH_FIELDS & set(values):
        if values[key] is not None:
            values[key] = Path(values[key])
    return ServerConfig(**values).validate()
