"""WDCE-Net."""
from __future__ import annotations

from rich import get_console
from rich.traceback import install as rich_tracebacks

from __metadata__ import __version__
from src import cli, utils

__all__ = (
    "__version__",
    "cli",
    "utils",
)

rich_tracebacks(
    console=get_console(),
    suppress=(
        "click",
        "rich",
        "anyio",
    ),
    show_locals=False,
)
"""Pre-configured traceback handler.

Suppresses some of the frames by default to reduce the amount printed to
the screen.
"""
