"""Source of truth for project metadata."""

__version__ = "0.1.0"
"""Project version."""
__project__ = "wdce-net"
"""Project name."""
