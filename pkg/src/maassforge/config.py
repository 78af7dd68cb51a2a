"""Runtime settings read from the environment."""

from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .log import LogLevel

ENV_PREFIX = "MAASSFORGE_"


def default_cache_dir() -> Path:
    return Path.home() / ".cache" / "maassforge"


class Settings(BaseSettings):
    """Process-wide defaults from ``MAASSFORGE_*``; CLI flags override them per job."""

    model_config = SettingsConfigDict(
        env_prefix=ENV_PREFIX,
        env_ignore_empty=True,
        populate_by_name=True,
        frozen=True,
    )

    cache_dir: Path = Field(
        default_factory=default_cache_dir,
        validation_alias=f"{ENV_PREFIX}CACHE",
    )
    log_level: LogLevel = "INFO"
    bits: int = 256
    workers: int = 1

    @field_validator("bits")
    @classmethod
    def _check_bits(cls, value: int) -> int:
        if value < 64:
            raise ValueError(f"bits must be at least 64, got {value}")
        return value

    @field_validator("workers")
    @classmethod
    def _check_workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"workers must be positive, got {value}")
        return value
