"""Run configuration shared by every command."""
from __future__ import annotations

from wdce.domain.run.resolve import load_document, resolve_run_config
from wdce.domain.run.schemas import RunConfig

__all__ = ["RunConfig", "load_document", "resolve_run_config"]
