"""Finite-difference verification of analytic gradients."""
from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from wdce.domain.tensor.engine import Graph, no_grad
from wdce.lib.exceptions import GradientCheckError, ShapeError
from wdce.lib.log import get_logger

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Sequence

    from wdce.domain.tensor.engine import Tensor
    from wdce.domain.tensor.rng import Rng

__all__ = ["DEFAULT_STEP", "grad_check"]

logger = get_logger()

DEFAULT_STEP = 1e-6
"""Central-difference step used by the verification suites."""


def _coordinates(tensor: Tensor, limit: int | None, rng: Rng | None) -> Iterator[tuple[int, ...]]:
    if limit is None or limit >= tensor.size or rng is None:
        yield from np.ndindex(tensor.shape)
        return
    for flat in sorted(rng.permutation(tensor.size)[:limit]):
        yield tuple(int(i) for i in np.unravel_index(int(flat), tensor.shape))


def _perturbed_value(
    f: Callable[..., Tensor], point: Sequence[Tensor], index: int, coordinate: tuple[int, ...]
) -> float:
    with no_grad():
        value = f(*point).item()
    if not math.isfinite(value):
        msg = f"non-finite function value {value}"
        raise GradientCheckError(msg, tensor_index=index, coordinate=coordinate)
    return value


def grad_check(
    f: Callable[..., Tensor],
    point: Sequence[Tensor],
    step: float = DEFAULT_STEP,
    *,
    max_coords: int | None = None,
    rng: Rng | None = None,
) -> float:
    """Compare reverse-mode gradients with central differences.

    The error at each coordinate is ``|analytic - numeric| / max(1, |analytic|, |numeric|)``.

    Args:
        f: Scalar-valued function of the tensors in ``point``.
        point: Tensors at which to differentiate; they are perturbed in place and restored.
        step: Central-difference step.
        max_coords: Check at most this many coordinates per tensor (sampled with ``rng``).
        rng: Stream used to sample coordinates when ``max_coords`` is set.

    Returns:
        The maximum relative error over all checked coordinates.
    """
    if step <= 0:
        msg = f"step must be positive, got {step}"
        raise ValueError(msg)
    for tensor in point:
        tensor.requires_grad = True
        tensor.zero_grad()
    with Graph() as graph:
        out = f(*point)
    if out.size != 1:
        msg = "grad_check needs a scalar function"
        raise ShapeError(msg, out.shape)
    if not math.isfinite(out.item()):
        msg = f"non-finite function value {out.item()}"
        raise GradientCheckError(msg, tensor_index=-1, coordinate=())
    if out.graph is graph:
        graph.backward(out)
    analytic = [np.zeros(t.shape) if t.grad is None else t.grad.copy() for t in point]

    worst = 0.0
    for index, tensor in enumerate(point):
        for coordinate in _coordinates(tensor, max_coords, rng):
            original = tensor.data[coordinate]
            tensor.data[coordinate] = original + step
            upper = _perturbed_value(f, point, index, coordinate)
            tensor.data[coordinate] = original - step
            lower = _perturbed_value(f, point, index, coordinate)
            tensor.data[coordinate] = original
            numeric = (upper - lower) / (2.0 * step)
            exact = float(analytic[index][coordinate])
            error = abs(exact - numeric) / max(1.0, abs(exact), abs(numeric))
            worst = max(worst, error)
    logger.debug("grad_check", tensors=len(point), max_relative_error=worst)
    return worst
