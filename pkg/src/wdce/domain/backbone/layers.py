"""ST-GC and SSA-Tformer layers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from wdce.domain.tensor import Rng, Tensor, as_tensor, ops, uniform_param, zeros_param
from wdce.lib.exceptions import ConfigurationError, ShapeError

if TYPE_CHECKING:
    from wdce.domain.backbone.graph import SkeletonGraph

__all__ = [
    "SsaParams",
    "StgcParams",
    "TcnParams",
    "spatial_attention",
    "ssa_tformer_layer",
    "st_gc_layer",
    "temporal_conv",
]


@dataclass(slots=True)
class TcnParams:
    """Per-joint temporal convolution ``C x C x k x 1``."""

    weight: Tensor
    bias: Tensor

    @classmethod
    def init(cls, channels: int, kernel: int, rng: Rng) -> TcnParams:
        """Uniform ``+-1/sqrt(C*k)`` kernel, zero bias."""
        return cls(
            weight=uniform_param(rng.split("weight"), (channels, channels, kernel, 1), channels * kernel),
            bias=zeros_param((channels,)),
        )


@dataclass(slots=True)
class StgcParams:
    """Graph aggregation, ``1x1`` channel map, then a temporal convolution."""

    gcn_w: Tensor
    gcn_b: Tensor
    tcn: TcnParams

    @property
    def in_channels(self) -> int:
        """Input width."""
        return self.gcn_w.shape[1]

    @property
    def out_channels(self) -> int:
        """Output width."""
        return self.gcn_w.shape[0]

    @classmethod
    def init(cls, in_channels: int, out_channels: int, kernel: int, rng: Rng) -> StgcParams:
        """Uniform ``+-1/sqrt(fan_in)`` weights, zero biases."""
        return cls(
            gcn_w=uniform_param(rng.split("gcn_w"), (out_channels, in_channels, 1, 1), in_channels),
            gcn_b=zeros_param((out_channels,)),
            tcn=TcnParams.init(out_channels, kernel, rng.split("tcn")),
        )


@dataclass(slots=True)
class SsaParams:
    """Per-frame multi-head self-attention over joints plus a temporal convolution."""

    q_w: Tensor
    q_b: Tensor
    k_w: Tensor
    k_b: Tensor
    v_w: Tensor
    v_b: Tensor
    o_w: Tensor
    o_b: Tensor
    tcn: TcnParams
    heads: int = field(default=1, metadata={"parameter": False})

    @property
    def channels(self) -> int:
        """Width ``C``."""
        return self.q_w.shape[0]

    @classmethod
    def init(cls, channels: int, heads: int, kernel: int, rng: Rng) -> SsaParams:
        """Uniform ``+-1/sqrt(C)`` projections, zero biases.

        Raises:
            ConfigurationError: If ``channels`` is not divisible by ``heads``.
        """
        if heads < 1 or channels % heads:
            msg = f"{channels} channels are not divisible by {heads} heads"
            raise ConfigurationError(msg)
        projections = {
            name: uniform_param(rng.split(name), (channels, channels), channels) for name in ("q_w", "k_w", "v_w", "o_w")
        }
        biases = {name: zeros_param((channels,)) for name in ("q_b", "k_b", "v_b", "o_b")}
        return cls(**projections, **biases, tcn=TcnParams.init(channels, kernel, rng.split("tcn")), heads=heads)


def temporal_conv(x: Tensor, params: TcnParams) -> Tensor:
    """Convolve every joint's trajectory over time; ``T`` is preserved."""
    kernel = params.weight.shape[2]
    return ops.conv2d(x, params.weight, params.bias, padding=(kernel // 2, 0))


def st_gc_layer(x: Tensor, graph: SkeletonGraph, params: StgcParams) -> Tensor:
    """``relu(tcn(relu(W * (x A))))``, plus ``x`` when the width is unchanged.

    Args:
        x: Input ``N x C_in x T x V``.
        graph: Skeleton providing ``A_norm``.
        params: Layer weights.

    Returns:
        ``N x C_out x T x V``.
    """
    x = as_tensor(x)
    if x.ndim != 4 or x.shape[1] != params.in_channels or x.shape[3] != graph.joints:  # noqa: PLR2004
        msg = "ST-GC layer: input does not match (C_in, V)"
        raise ShapeError(msg, x.shape, (params.in_channels, graph.joints))
    aggregated = ops.matmul(x, graph.adjacency)
    spatial = ops.relu(ops.conv2d(aggregated, params.gcn_w, params.gcn_b))
    out = ops.relu(temporal_conv(spatial, params.tcn))
    if params.in_channels == params.out_channels:
        out = ops.add(out, x)
    return out


def spatial_attention(x: Tensor, params: SsaParams) -> tuple[Tensor, Tensor]:
    """Multi-head self-attention among the joints of each frame.

    Args:
        x: Input ``N x C x T x V``.
        params: Layer weights.

    Returns:
        The attention output ``N x C x T x V`` (no residual) and the weights ``N x T x H x V x V``.
    """
    x = as_tensor(x)
    if x.ndim != 4 or x.shape[1] != params.channels:  # noqa: PLR2004
        msg = "SSA layer: input width does not match parameters"
        raise ShapeError(msg, x.shape, (params.channels,))
    n, channels, frames, joints = x.shape
    heads = params.heads
    if channels % heads:
        msg = f"{channels} channels are not divisible by {heads} heads"
        raise ConfigurationError(msg)
    width = channels // heads
    tokens = ops.transpose(x, (0, 2, 3, 1))

    def project(weight: Tensor, bias: Tensor) -> Tensor:
        flat = ops.add(ops.matmul(tokens, weight), bias)
        return ops.transpose(ops.reshape(flat, (n, frames, joints, heads, width)), (0, 1, 3, 2, 4))

    query = project(params.q_w, params.q_b)
    key = project(params.k_w, params.k_b)
    value = project(params.v_w, params.v_b)
    scores = ops.mul(ops.matmul(query, ops.transpose(key, (0, 1, 2, 4, 3))), 1.0 / math.sqrt(width))
    weights = ops.softmax(scores, axis=4)
    mixed = ops.matmul(weights, value)
    merged = ops.reshape(ops.transpose(mixed, (0, 1, 3, 2, 4)), (n, frames, joints, channels))
    out = ops.add(ops.matmul(merged, params.o_w), params.o_b)
    return ops.transpose(out, (0, 3, 1, 2)), weights


def ssa_tformer_layer(x: Tensor, params: SsaParams) -> Tensor:
    """``y = x + attention(x)``, then ``relu(tcn(y)) + y``.

    Args:
        x: Input ``N x C x T x V``.
        params: Layer weights.

    Returns:
        ``N x C x T x V``.
    """
    x = as_tensor(x)
    attended, _ = spatial_attention(x, params)
    y = ops.add(x, attended)
    return ops.add(ops.relu(temporal_conv(y, params.tcn)), y)
