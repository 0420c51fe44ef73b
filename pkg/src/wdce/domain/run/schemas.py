"""Run configuration document."""
from __future__ import annotations

from typing import Literal

from pydantic import Field

from wdce.domain.backbone import BackboneConfig
from wdce.domain.data import SynthSpec
from wdce.domain.model import TrainConfig
from wdce.lib.schema import BaseModel

__all__ = ["RunConfig"]


class RunConfig(BaseModel):
    """Everything a command needs: training, backbone, generator and split settings."""

    train: TrainConfig = Field(default_factory=TrainConfig)
    backbone: BackboneConfig = Field(default_factory=BackboneConfig)
    synth: SynthSpec = Field(default_factory=SynthSpec)
    split_fraction: float = Field(default=0.8, gt=0.0, lt=1.0, description="Training share of each class.")
    modality: Literal["joint", "bone", "joint_motion", "bone_motion"] = "joint"
