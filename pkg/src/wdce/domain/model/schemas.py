"""Training configuration and ablation switches."""
from __future__ import annotations

from pydantic import Field, model_validator

from wdce.domain.contrastive import ContrastiveConfig
from wdce.lib.constants import DEFAULT_SEED
from wdce.lib.schema import BaseModel

__all__ = ["ABLATION_PRESETS", "AblationSwitches", "TrainConfig"]


class AblationSwitches(BaseModel):
    """Which components of the network are active."""

    use_dwt: bool = True
    use_da: bool = True
    use_ta: bool = True
    use_pcl: bool = True
    use_channel_split: bool = False

    @model_validator(mode="after")
    def _check_consistent(self) -> AblationSwitches:
        if self.use_channel_split and self.use_dwt:
            msg = "use_channel_split replaces use_dwt; enable at most one"
            raise ValueError(msg)
        if (self.use_da or self.use_ta or self.use_pcl) and not self.decoupled:
            msg = "use_da, use_ta and use_pcl need use_dwt or use_channel_split"
            raise ValueError(msg)
        return self

    @property
    def decoupled(self) -> bool:
        """Whether the embedding is split into salient and subtle paths."""
        return self.use_dwt or self.use_channel_split


ABLATION_PRESETS: dict[str, AblationSwitches] = {
    "baseline": AblationSwitches(use_dwt=False, use_da=False, use_ta=False, use_pcl=False),
    "dwt": AblationSwitches(use_da=False, use_ta=False, use_pcl=False),
    "dwt_da": AblationSwitches(use_ta=False, use_pcl=False),
    "split_da": AblationSwitches(use_dwt=False, use_channel_split=True, use_ta=False, use_pcl=False),
    "dwt_da_pcl": AblationSwitches(use_ta=False),
    "dwt_da_ta": AblationSwitches(use_pcl=False),
    "full": AblationSwitches(),
}
"""The seven method rows of the component ablation, in report order."""


class TrainConfig(BaseModel):
    """Objective weights, optimizer, schedule and switches."""

    lambda_fuse: float = Field(default=0.4, ge=0.0)
    lambda_salient: float = Field(default=0.2, ge=0.0)
    lambda_proto: float = Field(default=0.4, ge=0.0)
    contrastive: ContrastiveConfig = Field(default_factory=ContrastiveConfig)
    learning_rate: float = Field(default=0.1, ge=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=4e-4, ge=0.0)
    grad_clip: float | None = Field(default=5.0, gt=0.0, description="Global gradient-norm cap; null disables it.")
    milestones: list[float] = Field(
        default_factory=lambda: [0.6, 0.8],
        description="Fractions of the total epochs after which the learning rate decays.",
    )
    decay: float = Field(default=0.1, gt=0.0, le=1.0)
    epochs: int = Field(default=30, ge=1)
    batch_size: int = Field(default=64, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    d_att: int = Field(default=8, ge=1, description="Latent width of trajectory attention.")
    da_kernel: int = Field(default=3, ge=1, description="Decoupling attention convolution width (odd).")
    switches: AblationSwitches = Field(default_factory=AblationSwitches)

    @model_validator(mode="after")
    def _check_schedule(self) -> TrainConfig:
        if any(not 0.0 < m < 1.0 for m in self.milestones) or self.milestones != sorted(self.milestones):
            msg = "milestones must be increasing fractions in (0, 1)"
            raise ValueError(msg)
        if self.da_kernel % 2 == 0:
            msg = f"da_kernel must be odd, got {self.da_kernel}"
            raise ValueError(msg)
        return self

    def milestone_epochs(self) -> list[int]:
        """Epoch indices at which the learning rate is multiplied by ``decay``."""
        return [max(1, int(fraction * self.epochs)) for fraction in self.milestones]

    def learning_rate_at(self, epoch: int) -> float:
        """Learning rate in effect during ``epoch`` (0-based)."""
        passed = sum(1 for milestone in self.milestone_epochs() if epoch >= milestone)
        return self.learning_rate * self.decay**passed
