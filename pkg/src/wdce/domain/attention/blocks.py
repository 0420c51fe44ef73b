"""Decoupling attention and trajectory-wise attention."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wdce.domain.attention.params import DecouplingAttentionParams, TrajectoryAttentionParams
from wdce.domain.tensor import Tensor, as_tensor, ops
from wdce.domain.wavelet import from_trajectories
from wdce.lib.exceptions import ShapeError

__all__ = [
    "AttentionMap",
    "decoupling_attention",
    "decoupling_weights",
    "recalibrate",
    "trajectory_attention",
]


@dataclass(frozen=True, slots=True)
class AttentionMap:
    """Trajectory-wise attention ``N x C x V``; each ``(n, c)`` row is a distribution over joints."""

    values: Tensor

    def row_sum_error(self) -> float:
        """Largest deviation of a row sum from one."""
        return float(np.max(np.abs(self.values.data.sum(axis=-1) - 1.0), initial=0.0))

    def flattened(self) -> np.ndarray:
        """Per-sample ``C*V`` vectors, untracked."""
        return self.values.data.reshape(self.values.shape[0], -1).copy()


def decoupling_weights(x_embed: Tensor, params: DecouplingAttentionParams) -> tuple[Tensor, Tensor]:
    """Compute the low- and high-band temporal weights from the embedding.

    Spatial mean pooling gives ``N x C x T``; the linear map halves time; the
    convolution reduces channels to two; a sigmoid bounds each weight in ``(0, 1)``.

    Args:
        x_embed: Embedding ``N x C x T x V``.
        params: Block parameters.

    Returns:
        ``(a_low, a_high)``, each ``N x 1 x T/2``.
    """
    x_embed = as_tensor(x_embed)
    if x_embed.ndim != 4 or x_embed.shape[1] != params.channels or x_embed.shape[2] != params.frames:  # noqa: PLR2004
        msg = "decoupling attention: embedding does not match parameters (C, T)"
        raise ShapeError(msg, x_embed.shape, (params.channels, params.frames))
    pooled = ops.mean(x_embed, axis=3)
    reduced = ops.add(ops.matmul(pooled, params.linear_w), params.linear_b)
    scores = ops.conv1d(reduced, params.conv_w, params.conv_b, padding=params.kernel // 2)
    weights = ops.sigmoid(scores)
    return weights[:, 0:1, :], weights[:, 1:2, :]


def recalibrate(
    x_embed: Tensor,
    low: Tensor,
    high: Tensor,
    params: DecouplingAttentionParams,
) -> tuple[Tensor, Tensor]:
    """Scale two ``N x C' x T/2 x V`` band features by the decoupling weights.

    The weights broadcast over channels and joints, so ``C'`` may differ from the
    embedding width (the channel-split control feeds halves).
    """
    low, high = as_tensor(low), as_tensor(high)
    a_low, a_high = decoupling_weights(x_embed, params)
    n, _, half = a_low.shape
    if low.ndim != 4 or low.shape != high.shape or low.shape[0] != n or low.shape[2] != half:  # noqa: PLR2004
        msg = "decoupling attention: band features must be N x C x T/2 x V"
        raise ShapeError(msg, low.shape, high.shape)
    salient = ops.mul(low, ops.reshape(a_low, (n, 1, half, 1)))
    subtle = ops.mul(high, ops.reshape(a_high, (n, 1, half, 1)))
    return salient, subtle


def decoupling_attention(
    x_embed: Tensor,
    x_low: Tensor,
    x_high: Tensor,
    params: DecouplingAttentionParams,
) -> tuple[Tensor, Tensor]:
    """Recalibrate the DWT bands into salient and subtle features.

    Args:
        x_embed: Embedding ``N x C x T x V``.
        x_low: Low band ``N x VC x T/2``.
        x_high: High band ``N x VC x T/2``.
        params: Block parameters.

    Returns:
        ``(x_salient, x_subtle)``, each ``N x C x T/2 x V``.
    """
    x_embed = as_tensor(x_embed)
    if x_embed.ndim != 4:  # noqa: PLR2004
        msg = "decoupling attention: expected N x C x T x V embedding"
        raise ShapeError(msg, x_embed.shape)
    _, channels, _, joints = x_embed.shape
    low = from_trajectories(x_low, channels, joints)
    high = from_trajectories(x_high, channels, joints)
    return recalibrate(x_embed, low, high, params)


def trajectory_attention(x_subtle: Tensor, params: TrajectoryAttentionParams) -> tuple[Tensor, AttentionMap]:
    """Reweight subtle features by a per-channel distribution over joints.

    ``F`` is the temporal mean (``N x C x V``). Branch A maps joints to ``d_att``
    (``N x C x d``), branch B maps channels to ``d_att`` (``N x V x d``, then
    transposed). Their product gives ``N x C x V`` scores, softmaxed over joints.

    Args:
        x_subtle: Subtle features ``N x C x T' x V``.
        params: Block parameters.

    Returns:
        ``(enhanced, att)`` with ``enhanced = x_subtle * att`` broadcast over time.
    """
    x_subtle = as_tensor(x_subtle)
    if x_subtle.ndim != 4:  # noqa: PLR2004
        msg = "trajectory attention: expected N x C x T' x V features"
        raise ShapeError(msg, x_subtle.shape)
    n, channels, _, joints = x_subtle.shape
    if params.mlp_a_w.shape[0] != joints or params.mlp_b_w.shape[0] != channels:
        msg = "trajectory attention: features do not match parameters (C, V)"
        raise ShapeError(msg, x_subtle.shape, (params.mlp_b_w.shape[0], params.mlp_a_w.shape[0]))
    if params.mlp_b_w.shape[1] != params.latent:
        msg = "trajectory attention: the two maps disagree on d_att"
        raise ShapeError(msg, params.mlp_a_w.shape, params.mlp_b_w.shape)
    pooled = ops.mean(x_subtle, axis=2)
    branch_a = ops.add(ops.matmul(pooled, params.mlp_a_w), params.mlp_a_b)
    branch_b = ops.add(ops.matmul(ops.transpose(pooled, (0, 2, 1)), params.mlp_b_w), params.mlp_b_b)
    scores = ops.matmul(branch_a, ops.transpose(branch_b, (0, 2, 1)))
    att = ops.softmax(scores, axis=2)
    enhanced = ops.mul(x_subtle, ops.reshape(att, (n, channels, 1, joints)))
    return enhanced, AttentionMap(att)
