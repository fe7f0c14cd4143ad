"""
Configuration management for network log-ARCH forecasting
Centralizes environment variable reading, config files and default values.
"""

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import load_dotenv

from network_logarch.core.errors import ConfigurationError

# Load environment variables from .env file
load_dotenv()

ENV_PREFIX: str = 'NETARCH_'
TRUE_VALUES = ('1', 'true', 'yes')


@dataclass(frozen=True)
class Config:
    """Experiment configuration"""
    window_len: int = 2540
    arch_order: int = 1
    instrument_depth: int = 2
    ar_max_order: int = 5
    ar_criterion: str = 'bic'
    zero_policy: str = 'floor_min_nonzero'
    zero_floor: Optional[float] = None
    normalize_inverse: bool = True
    refit_w_each_step: bool = False
    alpha: float = 0.10
    bootstrap_reps: int = 5000
    block_len: int = 10
    seed: int = 0
    ensemble_burn_in: int = 60
    minvar_ridge: float = 1e-8
    workers: int = 1
    show_progress: bool = True
    log_level: str = 'INFO'

    def __post_init__(self):
        if self.ar_criterion not in ('aic', 'bic'):
            raise ConfigurationError(f"ar_criterion must be 'aic' or 'bic', got {self.ar_criterion!r}")
        if self.zero_policy not in ('floor_min_nonzero', 'floor_constant'):
            raise ConfigurationError(f"Unknown zero_policy: {self.zero_policy!r}")
        if self.zero_policy == 'floor_constant' and (self.zero_floor is None or self.zero_floor <= 0):
            raise ConfigurationError("floor_constant policy needs a positive zero_floor")
        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.window_len < 100:
            raise ConfigurationError(f"window_len must be at least 100, got {self.window_len}")
        for name in ('arch_order', 'instrument_depth', 'ar_max_order', 'bootstrap_reps', 'block_len', 'workers'):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")

    @classmethod
    def from_env(cls) -> 'Config':
        """
        Create config from NETARCH_* environment variables

        Returns:
            Config instance with values from environment, defaults elsewhere
        """
        values: Dict[str, Any] = {}
        for f in fields(cls):
            raw = os.getenv(ENV_PREFIX + f.name.upper())
            if raw is not None and raw != '':
                values[f.name] = _coerce(f.name, raw)
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path], base: Optional['Config'] = None) -> 'Config':
        """
        Load a JSON config file on top of a base config

        Args:
            path: JSON file whose keys mirror the Config fields
            base: Config to override (defaults to the environment config)

        Raises:
            ConfigurationError: If the file is unreadable or has unknown keys
        """
        try:
            payload = json.loads(Path(path).read_text(encoding='utf-8'))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot read config file {path}: {e}")
        if not isinstance(payload, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")
        return (base or cls.from_env()).with_overrides(**payload)

    def with_overrides(self, **overrides: Any) -> 'Config':
        """Return a copy with the given non-None fields replaced"""
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _coerce(name: str, raw: str) -> Any:
    """Convert an environment string to the type of the field default"""
    default = Config.__dataclass_fields__[name].default
    try:
        if isinstance(default, bool):
            return raw.lower() in TRUE_VALUES
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float) or name == 'zero_floor':
            return float(raw)
    except ValueError:
        raise ConfigurationError(f"Invalid value for {ENV_PREFIX}{name.upper()}: {raw!r}")
    return raw


# Global config instance
_config: Optional[Config] = None


def get_config() -> Config:
    """Get the global configuration instance"""
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def set_config(config: Config) -> None:
    """Install a config as the global instance (used by the CLI after flag parsing)"""
    global _config
    _config = config


def reset_config():
    """Reset the global config (useful for testing)"""
    global _config
    _config = None
