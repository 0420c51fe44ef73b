"""Single-level Haar DWT over trajectory rows and its exact inverse.

Inputs are ``N x VC x T`` stacks of trajectories. Filters enter the graph as
constants, so the backward pass of :func:`dwt` applies the transposed filters to
the band gradients, which is :func:`idwt` of those gradients.
"""
from __future__ import annotations

from typing import TYPE_CHECKING

from wdce.domain.tensor import Tensor, as_tensor, ops
from wdce.domain.wavelet.filters import HaarFilterPair, build_haar
from wdce.lib.exceptions import ShapeError

if TYPE_CHECKING:
    from wdce.lib.types import Array

__all__ = ["dwt", "dwt_array", "from_trajectories", "idwt", "idwt_array", "to_trajectories"]


def dwt(x: Tensor, filters: HaarFilterPair | None = None) -> tuple[Tensor, Tensor]:
    """Split trajectories into low and high bands.

    Args:
        x: Trajectories, last axis is time (``... x T``).
        filters: Filter pair for ``T``; built on demand when omitted.

    Returns:
        ``(x_low, x_high)``, each with the last extent halved.
    """
    x = as_tensor(x)
    if x.ndim < 2:  # noqa: PLR2004
        msg = "dwt needs a stack of trajectory rows"
        raise ShapeError(msg, x.shape)
    filters = filters or build_haar(x.shape[-1])
    if x.shape[-1] != filters.frames:
        msg = "dwt: trajectory length does not match the filter pair"
        raise ShapeError(msg, x.shape, (filters.frames,))
    return ops.matmul(x, Tensor(filters.low)), ops.matmul(x, Tensor(filters.high))


def idwt(x_low: Tensor, x_high: Tensor, filters: HaarFilterPair | None = None) -> Tensor:
    """Reconstruct trajectories from their two bands.

    Args:
        x_low: Low band, last extent ``T/2``.
        x_high: High band with the same shape.
        filters: Filter pair for ``T``; built on demand when omitted.

    Returns:
        ``x_low @ L.T + x_high @ H.T``.
    """
    x_low, x_high = as_tensor(x_low), as_tensor(x_high)
    if x_low.shape != x_high.shape or x_low.ndim < 2:  # noqa: PLR2004
        msg = "idwt: bands must share one shape"
        raise ShapeError(msg, x_low.shape, x_high.shape)
    filters = filters or build_haar(2 * x_low.shape[-1])
    if x_low.shape[-1] != filters.half:
        msg = "idwt: band length does not match the filter pair"
        raise ShapeError(msg, x_low.shape, (filters.half,))
    return ops.add(ops.matmul(x_low, Tensor(filters.low.T)), ops.matmul(x_high, Tensor(filters.high.T)))


def dwt_array(x: Array) -> tuple[Array, Array]:
    """Untracked :func:`dwt` over a plain array whose last axis is time."""
    filters = build_haar(x.shape[-1])
    return x @ filters.low, x @ filters.high


def idwt_array(x_low: Array, x_high: Array) -> Array:
    """Untracked :func:`idwt` over plain arrays."""
    if x_low.shape != x_high.shape:
        msg = "idwt: bands must share one shape"
        raise ShapeError(msg, x_low.shape, x_high.shape)
    filters = build_haar(2 * x_low.shape[-1])
    return x_low @ filters.low.T + x_high @ filters.high.T


def to_trajectories(x: Tensor) -> Tensor:
    """Reshape ``N x C x T x V`` features to ``N x (C*V) x T`` trajectory rows.

    Row ``c*V + v`` holds channel ``c`` of joint ``v``.
    """
    x = as_tensor(x)
    if x.ndim != 4:  # noqa: PLR2004
        msg = "expected N x C x T x V features"
        raise ShapeError(msg, x.shape)
    n, c, t, v = x.shape
    return ops.reshape(ops.transpose(x, (0, 1, 3, 2)), (n, c * v, t))


def from_trajectories(x: Tensor, channels: int, joints: int) -> Tensor:
    """Inverse of :func:`to_trajectories` for any temporal extent."""
    x = as_tensor(x)
    if x.ndim != 3 or x.shape[1] != channels * joints:  # noqa: PLR2004
        msg = "trajectory rows do not match channels x joints"
        raise ShapeError(msg, x.shape, (channels * joints,))
    n, _, t = x.shape
    return ops.transpose(ops.reshape(x, (n, channels, joints, t)), (0, 1, 3, 2))
