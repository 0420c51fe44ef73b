"""Config resolution: flags over file over ``WDCE_SEED`` over defaults."""
from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

from pydantic import ValidationError

from utils import deep_merge, parse_assignment, set_dotted
from wdce.domain.run.schemas import RunConfig
from wdce.lib import settings
from wdce.lib.exceptions import ConfigurationError
from wdce.lib.serialization import from_json

if TYPE_CHECKING:
    from collections.abc import Sequence

__all__ = ["load_document", "resolve_run_config"]


def load_document(path: Path | str) -> dict[str, Any]:
    """Read a JSON object from ``path``.

    Raises:
        ConfigurationError: If the file is missing or does not hold an object.
    """
    try:
        document = from_json(Path(path).read_bytes())
    except OSError as exc:
        msg = f"cannot read config {path}: {exc.strerror}"
        raise ConfigurationError(msg) from exc
    except ValueError as exc:
        msg = f"config {path} is not valid JSON: {exc}"
        raise ConfigurationError(msg) from exc
    if not isinstance(document, dict):
        msg = f"config {path} must hold a JSON object"
        raise ConfigurationError(msg)
    return document


def _env_seed() -> int | None:
    return settings.RuntimeSettings().SEED


def resolve_run_config(
    config_file: Path | str | None = None,
    overrides: Sequence[str] = (),
    *,
    seed: int | None = None,
    synth_file: Path | str | None = None,
) -> RunConfig:
    """Layer the configuration sources.

    Order of precedence, lowest first: built-in defaults, ``WDCE_SEED`` (seed only),
    the config file, a bare generator spec file (``synth`` section only), ``--set``
    assignments, and the ``--seed`` flag, which sets both ``train.seed`` and
    ``synth.seed``.

    Args:
        config_file: A full or partial :class:`RunConfig` JSON document.
        overrides: ``section.field=value`` assignments.
        seed: Seed flag.
        synth_file: A :class:`~wdce.domain.data.SynthSpec` JSON document.

    Returns:
        The validated configuration.

    Raises:
        ConfigurationError: On unreadable files, unknown keys or invalid values.
    """
    document = RunConfig().model_dump(mode="json")
    env_seed = _env_seed()
    if env_seed is not None:
        set_dotted(document, "train.seed", env_seed)
        set_dotted(document, "synth.seed", env_seed)
    if config_file is not None:
        document = deep_merge(document, load_document(config_file))
    if synth_file is not None:
        document = deep_merge(document, {"synth": load_document(synth_file)})
    for assignment in overrides:
        try:
            key, value = parse_assignment(assignment)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        set_dotted(document, key, value)
    if seed is not None:
        set_dotted(document, "train.seed", seed)
        set_dotted(document, "synth.seed", seed)
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        errors = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()
        )
        msg = f"invalid configuration: {errors}"
        raise ConfigurationError(msg) from exc
