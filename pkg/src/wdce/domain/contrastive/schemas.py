"""Contrastive loss configuration."""
from __future__ import annotations

from pydantic import Field

from wdce.lib.schema import BaseModel

__all__ = ["ContrastiveConfig"]


class ContrastiveConfig(BaseModel):
    """Weights and temperature of the prototype contrastive loss."""

    alpha: float = Field(default=0.9, ge=0.0, description="Weight of the feature-prototype term.")
    beta: float = Field(default=0.1, ge=0.0, description="Weight of the attention-prototype term.")
    tau: float = Field(default=0.1, gt=0.0, description="Softmax temperature over prototype similarities.")
    momentum: float = Field(default=0.9, gt=0.0, lt=1.0, description="EMA momentum of prototype updates.")
    strict: bool = Field(default=False, description="Raise instead of skipping when prototypes are uninitialized.")
