"""
Centralized configuration management for the laboratory.

Process-wide settings come from the environment (and an optional .env file);
per-run settings come from a TOML file validated into a RunConfig.
"""
from pathlib import Path
from typing import Union

from pydantic import ValidationError # type: ignore
from pydantic_settings import BaseSettings, SettingsConfigDict # type: ignore

try:
    import tomllib # type: ignore
except ModuleNotFoundError:
    import tomli as tomllib # type: ignore

from models.run_config import RunConfig
from services.exceptions import ConfigurationError


class Settings(BaseSettings):
    """
    Manages process settings loaded from the environment.

    Each field is read from the environment variable of the same name, after
    the values in `.env` if that file exists.
    """
    LORENZLAB_OUTPUT_DIR: str = "runs"
    LORENZLAB_THREADS: int = 0
    LORENZLAB_RUN_LOG: str = "run_log.jsonl"

    model_config = SettingsConfigDict(
        env_file=".env",
        extra="ignore"
    )


settings = Settings()


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Reads and validates a TOML run configuration.

    Raises:
        ConfigurationError: If the file is unreadable, not TOML, or fails validation.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as e:
        raise ConfigurationError(f"Cannot read config '{path}': {e.strerror or e}.")
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Config '{path}' is not valid TOML: {e}.")

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        errors = e.errors(include_url=False, include_context=False)
        lines = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in errors]
        raise ConfigurationError(f"Config '{path}' is invalid:\n  " + "\n  ".join(lines), errors=errors)
