from __future__ import annotations

import os
from pathlib import Path

import yaml
from pydantic import BaseModel, ValidationError, field_validator

CONFIG_DIR = Path("~/.config/biquad-spectra").expanduser()
CONFIG_FILE = CONFIG_DIR / "config.yaml"
THREADS_ENV = "BIQ_THREADS"


class ConfigError(RuntimeError):
    """Raised when the configuration file or environment holds invalid values."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class SolverConfig(BaseModel):
    max_iter: int = 5000
    tol: float = 1e-10
    # None means: largest |a_{ijij}| of the weakly symmetric part, plus 1.
    shift: float | None = None
    restarts: int = 32
    seed: int = 0
    polish_steps: int = 500
    threads: int = 0

    @field_validator("max_iter", "restarts", "polish_steps")
    @classmethod
    def validate_positive_count(cls, v: int) -> int:
        if v < 1:
            msg = "must be at least 1"
            raise ValueError(msg)
        return v

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, v: float) -> float:
        if not v > 0:
            msg = "tol must be positive"
            raise ValueError(msg)
        return v

    @field_validator("shift")
    @classmethod
    def validate_shift(cls, v: float | None) -> float | None:
        if v is not None and not v >= 0:
            msg = "shift must be nonnegative"
            raise ValueError(msg)
        return v

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        if v < 0:
            msg = "threads must be >= 0 (0 = auto)"
            raise ValueError(msg)
        return v

    def workers(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


class OracleConfig(BaseModel):
    grid: int = 721
    tol: float = 1e-9

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: int) -> int:
        if v < 3:
            msg = "grid needs at least 3 points per angle"
            raise ValueError(msg)
        return v

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, v: float) -> float:
        if not v > 0:
            msg = "tol must be positive"
            raise ValueError(msg)
        return v


class AppConfig(BaseModel):
    solver: SolverConfig = SolverConfig()
    oracle: OracleConfig = OracleConfig()
    samples: int = 10_000
    log_level: str = "WARNING"
    log_file: Path | None = None

    @field_validator("samples")
    @classmethod
    def validate_samples(cls, v: int) -> int:
        if v < 1:
            msg = "samples must be at least 1"
            raise ValueError(msg)
        return v


def _threads_from_env() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if value < 0:
        raise ConfigError(f"{THREADS_ENV}={raw!r} must be >= 0 (0 = auto)")
    return value


def load_config(path: Path | None = None) -> AppConfig:
    """Load the YAML config (defaults when absent), then apply BIQ_THREADS."""
    config_file = path if path is not None else CONFIG_FILE
    data: dict[str, object] = {}
    if config_file.exists():
        try:
            with config_file.open() as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(
                f"Config file at {config_file} contains invalid YAML: {e}. "
                "Fix or delete the file to reset to defaults."
            ) from e
    elif path is not None:
        raise ConfigError(f"Config file {config_file} does not exist.")

    try:
        cfg = AppConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(
            f"Config file at {config_file} has invalid values: {e}. "
            "Fix or delete the file to reset to defaults."
        ) from e

    threads = _threads_from_env()
    if threads is not None:
        cfg = cfg.model_copy(update={"solver": cfg.solver.model_copy(update={"threads": threads})})
    return cfg


def dump_config(cfg: AppConfig) -> str:
    """Render a config as YAML (Paths as strings)."""
    data = cfg.model_dump(mode="json")
    return yaml.dump(data, default_flow_style=False, sort_keys=False)


def with_overrides(
    cfg: AppConfig,
    *,
    samples: int | None = None,
    grid: int | None = None,
    **solver: object,
) -> AppConfig:
    """Apply command-line overrides (None = keep) and re-validate."""
    data = cfg.model_dump()
    data["solver"].update({k: v for k, v in solver.items() if v is not None})
    if samples is not None:
        data["samples"] = samples
    if grid is not None:
        data["oracle"]["grid"] = grid
    try:
        return AppConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid option value: {e}") from e
