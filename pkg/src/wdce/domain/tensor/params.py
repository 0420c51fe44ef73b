"""Named parameter containers and their initializers."""
from __future__ import annotations

import dataclasses
import math
from typing import TYPE_CHECKING, Any

import numpy as np

from wdce.domain.tensor.engine import Tensor

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from wdce.domain.tensor.rng import Rng

__all__ = ["named_parameters", "uniform_param", "zeros_param"]


def uniform_param(rng: Rng, shape: Sequence[int], fan_in: int, name: str | None = None) -> Tensor:
    """Trainable tensor drawn uniformly from ``[-1/sqrt(fan_in), 1/sqrt(fan_in))``."""
    bound = 1.0 / math.sqrt(max(fan_in, 1))
    return Tensor(rng.uniform(-bound, bound, shape), requires_grad=True, name=name)


def zeros_param(shape: Sequence[int], name: str | None = None) -> Tensor:
    """Trainable tensor of zeros."""
    return Tensor(np.zeros(tuple(shape)), requires_grad=True, name=name)


def named_parameters(container: Any, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
    """Walk dataclass fields, lists and dicts, yielding every trainable tensor with a dotted name.

    Args:
        container: A dataclass instance, sequence, mapping or tensor.
        prefix: Name of ``container`` itself.

    Yields:
        ``(name, tensor)`` pairs in field declaration order.
    """
    if isinstance(container, Tensor):
        if container.requires_grad:
            yield prefix, container
    elif dataclasses.is_dataclass(container) and not isinstance(container, type):
        for field in dataclasses.fields(container):
            if field.metadata.get("parameter", True):
                yield from named_parameters(getattr(container, field.name), _join(prefix, field.name))
    elif isinstance(container, list | tuple):
        for position, item in enumerate(container):
            yield from named_parameters(item, _join(prefix, str(position)))
    elif isinstance(container, dict):
        for key in sorted(container):
            yield from named_parameters(container[key], _join(prefix, str(key)))


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name
