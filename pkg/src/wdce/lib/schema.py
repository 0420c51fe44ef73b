"""Schema."""
from __future__ import annotations

from pydantic import BaseModel as _BaseModel
from pydantic import ConfigDict

__all__ = ["BaseModel"]


class BaseModel(_BaseModel):
    """Base configuration document.

    Unknown keys are rejected so typos in config files fail loudly.
    """

    model_config = ConfigDict(
        validate_assignment=True,
        from_attributes=True,
        use_enum_values=True,
        extra="forbid",
    )
