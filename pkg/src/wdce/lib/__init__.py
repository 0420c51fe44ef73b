"""WDCE Lib."""
from __future__ import annotations

from wdce.lib import constants, exceptions, log, schema, serialization, settings, types

__all__ = [
    "constants",
    "exceptions",
    "log",
    "schema",
    "serialization",
    "settings",
    "types",
]
