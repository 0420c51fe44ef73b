"""SGD with momentum and L2 weight decay."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Iterable

    from wdce.domain.tensor import Tensor
    from wdce.lib.types import Array

__all__ = ["SgdState", "clip_gradients", "sgd_step"]


@dataclass(slots=True)
class SgdState:
    """Velocity buffer per parameter name and the number of steps taken."""

    velocity: dict[str, Array] = field(default_factory=dict)
    steps: int = 0


def clip_gradients(parameters: Iterable[tuple[str, Tensor]], max_norm: float) -> float:
    """Scale all gradients so their global norm is at most ``max_norm``.

    Returns:
        The norm before clipping.
    """
    tensors = [tensor for _, tensor in parameters if tensor.grad is not None]
    norm = math.sqrt(sum(float(np.sum(tensor.grad * tensor.grad)) for tensor in tensors))  # type: ignore[operator]
    if norm > max_norm:
        scale = max_norm / norm
        for tensor in tensors:
            tensor.grad = tensor.grad * scale  # type: ignore[operator]
    return norm


def sgd_step(
    state: SgdState,
    parameters: Iterable[tuple[str, Tensor]],
    *,
    learning_rate: float,
    momentum: float,
    weight_decay: float,
) -> None:
    """``v <- mu v + (g + wd p)``; ``p <- p - lr v``, in place.

    Parameters without a gradient still decay and carry momentum.
    """
    for name, tensor in parameters:
        grad = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        update = grad + weight_decay * tensor.data
        previous = state.velocity.get(name)
        velocity = update if previous is None else momentum * previous + update
        state.velocity[name] = velocity
        tensor.data -= learning_rate * velocity
    state.steps += 1
