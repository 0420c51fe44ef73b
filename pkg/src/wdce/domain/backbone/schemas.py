"""Backbone configuration."""
from __future__ import annotations

from pydantic import Field, model_validator

from wdce.lib.schema import BaseModel

__all__ = ["BackboneConfig"]


class BackboneConfig(BaseModel):
    """Shape of the ST-GC / SSA-Tformer feature extractor."""

    n_stgc: int = Field(default=3, ge=1, description="Number of graph-convolution layers.")
    n_ssa: int = Field(default=2, ge=0, description="Number of spatial self-attention layers after them.")
    channels: list[int] = Field(default_factory=lambda: [16, 16, 32], description="Output width of each ST-GC layer.")
    heads: int = Field(default=2, ge=1, description="Attention heads per SSA-Tformer layer.")
    tcn_kernel: int = Field(default=9, ge=1, description="Temporal convolution width (odd).")
    in_channels: int = Field(default=3, ge=1, description="Coordinates per joint.")

    @model_validator(mode="after")
    def _check_shape(self) -> BackboneConfig:
        if len(self.channels) != self.n_stgc:
            msg = f"channels lists {len(self.channels)} widths for {self.n_stgc} ST-GC layers"
            raise ValueError(msg)
        if any(width < 1 for width in self.channels):
            msg = "channel widths must be positive"
            raise ValueError(msg)
        if self.tcn_kernel % 2 == 0:
            msg = f"tcn_kernel must be odd to preserve T, got {self.tcn_kernel}"
            raise ValueError(msg)
        if self.n_ssa and self.embed_channels % self.heads:
            msg = f"embedding width {self.embed_channels} is not divisible by {self.heads} heads"
            raise ValueError(msg)
        return self

    @property
    def embed_channels(self) -> int:
        """Width ``C`` of the embedding fed to the decoupling stage."""
        return self.channels[-1]
