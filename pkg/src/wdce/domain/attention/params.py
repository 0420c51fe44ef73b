"""Trainable parameters of the two attention blocks."""
from __future__ import annotations

from dataclasses import dataclass

from wdce.domain.tensor import Rng, Tensor, uniform_param, zeros_param
from wdce.lib.exceptions import ConfigurationError

__all__ = ["DecouplingAttentionParams", "TrajectoryAttentionParams"]


@dataclass(slots=True)
class DecouplingAttentionParams:
    """Temporal linear map ``T -> T/2`` followed by a ``C -> 2`` temporal convolution."""

    linear_w: Tensor
    linear_b: Tensor
    conv_w: Tensor
    conv_b: Tensor

    @property
    def channels(self) -> int:
        """Embedding channels ``C`` read by the convolution."""
        return self.conv_w.shape[1]

    @property
    def frames(self) -> int:
        """Input frame count ``T``."""
        return self.linear_w.shape[0]

    @property
    def kernel(self) -> int:
        """Convolution width."""
        return self.conv_w.shape[2]

    @classmethod
    def init(cls, channels: int, frames: int, rng: Rng, kernel: int = 3) -> DecouplingAttentionParams:
        """Draw weights uniformly in ``+-1/sqrt(fan_in)`` with zero biases.

        Args:
            channels: Embedding channels ``C``.
            frames: Frame count ``T`` (even).
            rng: Parameter stream.
            kernel: Odd convolution width.
        """
        _check(channels, frames, kernel)
        half = frames // 2
        return cls(
            linear_w=uniform_param(rng.split("linear_w"), (frames, half), frames),
            linear_b=zeros_param((half,)),
            conv_w=uniform_param(rng.split("conv_w"), (2, channels, kernel), channels * kernel),
            conv_b=zeros_param((2,)),
        )

    @classmethod
    def zeros(cls, channels: int, frames: int, kernel: int = 3) -> DecouplingAttentionParams:
        """All-zero parameters; every attention weight evaluates to exactly 0.5."""
        _check(channels, frames, kernel)
        half = frames // 2
        return cls(
            linear_w=zeros_param((frames, half)),
            linear_b=zeros_param((half,)),
            conv_w=zeros_param((2, channels, kernel)),
            conv_b=zeros_param((2,)),
        )


@dataclass(slots=True)
class TrajectoryAttentionParams:
    """Two fully connected maps into a shared latent width ``d_att``.

    ``mlp_a`` acts along joints (``V -> d_att``) for every channel; ``mlp_b`` acts
    along channels (``C -> d_att``) for every joint. They do not share weights.
    """

    mlp_a_w: Tensor
    mlp_a_b: Tensor
    mlp_b_w: Tensor
    mlp_b_b: Tensor

    @property
    def latent(self) -> int:
        """Shared latent width ``d_att``."""
        return self.mlp_a_w.shape[1]

    @classmethod
    def init(cls, channels: int, joints: int, rng: Rng, latent: int = 8) -> TrajectoryAttentionParams:
        """Draw weights uniformly in ``+-1/sqrt(fan_in)`` with zero biases."""
        if latent < 1:
            msg = f"d_att must be >= 1, got {latent}"
            raise ConfigurationError(msg)
        return cls(
            mlp_a_w=uniform_param(rng.split("mlp_a_w"), (joints, latent), joints),
            mlp_a_b=zeros_param((latent,)),
            mlp_b_w=uniform_param(rng.split("mlp_b_w"), (channels, latent), channels),
            mlp_b_b=zeros_param((latent,)),
        )

    @classmethod
    def zeros(cls, channels: int, joints: int, latent: int = 8) -> TrajectoryAttentionParams:
        """All-zero parameters; the attention map evaluates to exactly ``1/V``."""
        if latent < 1:
            msg = f"d_att must be >= 1, got {latent}"
            raise ConfigurationError(msg)
        return cls(
            mlp_a_w=zeros_param((joints, latent)),
            mlp_a_b=zeros_param((latent,)),
            mlp_b_w=zeros_param((channels, latent)),
            mlp_b_b=zeros_param((latent,)),
        )


def _check(channels: int, frames: int, kernel: int) -> None:
    if channels < 1 or frames < 2 or frames % 2:  # noqa: PLR2004
        msg = f"decoupling attention needs C >= 1 and even T >= 2, got C={channels}, T={frames}"
        raise ConfigurationError(msg)
    if kernel < 1 or kernel % 2 == 0:
        msg = f"decoupling attention kernel width must be odd, got {kernel}"
        raise ConfigurationError(msg)
