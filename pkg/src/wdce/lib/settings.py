"""Project Settings."""
from __future__ import annotations

from typing import Final, Literal

from dotenv import load_dotenv
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from __metadata__ import __project__ as project_name
from __metadata__ import __version__ as version

__all__ = [
    "log",
    "project",
    "runtime",
    "LogSettings",
    "ProjectSettings",
    "RuntimeSettings",
    "load_settings",
]

load_dotenv()

DEFAULT_MODULE_NAME: Final = "wdce"


class ProjectSettings(BaseSettings):
    """Project Settings."""

    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env", extra="ignore")

    DEBUG: bool = False
    """Emit debug-level events and full tracebacks."""
    ENVIRONMENT: str = "prod"
    """``dev``, ``prod``, ``test``, etc."""
    NAME: str = project_name
    """Application name."""
    VERSION: str = version
    """The current version of the application."""


class LogSettings(BaseSettings):
    """Logging config for the Project."""

    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env", env_prefix="LOG_", extra="ignore")

    LEVEL: int = 20
    """Stdlib log levels.

    Only emit logs at this level, or higher.
    """
    FORMAT: str = "[[ %(asctime)s ]] - [[ %(name)s ]] - [[ %(levelname)s ]] - %(message)s"
    """Format string for records that bypass structlog."""
    NUMPY_ERRORS: Literal["raise", "warn", "ignore"] = "ignore"
    """Floating-point error policy applied while the CLI runs.

    Non-finite losses are caught explicitly by the trainer, so the default leaves
    numpy quiet.
    """


class RuntimeSettings(BaseSettings):
    """Run-time knobs read from ``WDCE_*`` environment variables."""

    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env", env_prefix="WDCE_", extra="ignore")

    SEED: int | None = None
    """Last-resort seed override, used only when neither a flag nor a config file sets one."""
    ABLATE_WORKERS: int = 1
    """Seed replicates run concurrently by ``ablate``."""


def load_settings() -> tuple[LogSettings, ProjectSettings, RuntimeSettings]:
    """Load Settings file.

    Returns:
        Settings: application settings
    """
    try:
        log: LogSettings = LogSettings.model_validate({})
        project: ProjectSettings = ProjectSettings.model_validate({})
        runtime: RuntimeSettings = RuntimeSettings.model_validate({})
    except ValidationError as error:
        print(f"Could not load settings. Error: {error!r}")  # noqa: T201
        raise error from error
    return log, project, runtime


log, project, runtime = load_settings()
