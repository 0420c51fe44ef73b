"""Dense tensor type and the tape that replays backward passes.

Operations executed while a :class:`Graph` is active are appended to its tape in
execution order. :meth:`Graph.backward` walks the tape in reverse, so the order in
which gradients are propagated is fixed by the forward pass and results are
reproducible bit for bit.

.. code-block:: python

    with Graph() as graph:
        loss = ops.sum(ops.mul(x, x))
    graph.backward(loss)
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from wdce.lib.exceptions import GraphError, ShapeError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator

    from wdce.lib.types import Array, Shape

__all__ = ["Graph", "Node", "Tensor", "as_tensor", "current_graph", "no_grad"]

_active_graph: ContextVar[Graph | None] = ContextVar("wdce_active_graph", default=None)


def current_graph() -> Graph | None:
    """Return the graph recording operations in this context, if any."""
    return _active_graph.get()


@contextmanager
def no_grad() -> Iterator[None]:
    """Suspend recording; operations inside produce untracked tensors."""
    token = _active_graph.set(None)
    try:
        yield
    finally:
        _active_graph.reset(token)


class Tensor:
    """Dense double-precision array with an optional gradient buffer.

    A tensor is a *leaf* when no recorded operation produced it (``graph is None``).
    Backward passes accumulate into the ``grad`` of leaves that require gradients;
    callers zero them between steps.
    """

    __slots__ = ("data", "grad", "graph", "name", "requires_grad")

    def __init__(self, data: Any, *, requires_grad: bool = False, name: str | None = None) -> None:
        """Initialize the tensor.

        Args:
            data: Values, converted to a C-contiguous float64 array of the same rank.
            requires_grad: Whether backward passes should produce a gradient for this tensor.
            name: Optional label used in diagnostics and checkpoints.
        """
        self.data: Array = np.require(data, dtype=np.float64, requirements=["C"])
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self.graph: Graph | None = None
        self.name = name

    @property
    def shape(self) -> Shape:
        """Extents of the tensor."""
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        """Rank of the tensor."""
        return self.data.ndim

    @property
    def size(self) -> int:
        """Number of elements."""
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        """Whether the tensor was created directly rather than by a recorded operation."""
        return self.graph is None

    def numpy(self) -> Array:
        """Return the underlying array (no copy)."""
        return self.data

    def item(self) -> float:
        """Return the value of a one-element tensor."""
        if self.size != 1:
            msg = "item() needs a single-element tensor"
            raise ShapeError(msg, self.shape)
        return float(self.data.reshape(()))

    def detach(self) -> Tensor:
        """Return an untracked tensor sharing no state with this one."""
        return Tensor(self.data.copy(), name=self.name)

    def zero_grad(self) -> None:
        """Drop the accumulated gradient."""
        self.grad = None

    def accumulate(self, grad: Array) -> None:
        """Add ``grad`` into the gradient buffer.

        Args:
            grad: Gradient with the tensor's exact shape.
        """
        if grad.shape != self.data.shape:
            msg = "gradient shape does not match tensor"
            raise ShapeError(msg, grad.shape, self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def backward(self, grad: Array | None = None) -> None:
        """Propagate gradients from this tensor through the graph that produced it.

        Args:
            grad: Seed gradient; defaults to one for single-element tensors.
        """
        if self.graph is None:
            if self.requires_grad:
                self.accumulate(_seed(self, grad))
                return
            msg = "tensor was not produced by a recorded operation"
            raise GraphError(msg)
        self.graph.backward(self, grad)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    def __add__(self, other: Any) -> Tensor:
        return ops.add(self, other)

    def __radd__(self, other: Any) -> Tensor:
        return ops.add(other, self)

    def __sub__(self, other: Any) -> Tensor:
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> Tensor:
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> Tensor:
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> Tensor:
        return ops.mul(other, self)

    def __truediv__(self, other: Any) -> Tensor:
        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> Tensor:
        return ops.div(other, self)

    def __neg__(self) -> Tensor:
        return ops.neg(self)

    def __matmul__(self, other: Any) -> Tensor:
        return ops.matmul(self, other)

    def __getitem__(self, key: Any) -> Tensor:
        return ops.index(self, key)


def as_tensor(value: Any) -> Tensor:
    """Wrap constants as untracked tensors; tensors pass through."""
    return value if isinstance(value, Tensor) else Tensor(value)


@dataclass(slots=True)
class Node:
    """One executed operation on the tape."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[Array], tuple[Array | None, ...]]


class Graph:
    """Ordered record of executed operations.

    A graph supports exactly one backward pass; a second call without a fresh
    forward pass raises :class:`~wdce.lib.exceptions.GraphError`.
    """

    def __init__(self) -> None:
        """Initialize an empty tape."""
        self.nodes: list[Node] = []
        self.visited: list[str] = []
        self.consumed = False
        self._tokens: list[Any] = []

    def __enter__(self) -> Graph:
        self._tokens.append(_active_graph.set(self))
        return self

    def __exit__(self, *_: object) -> None:
        _active_graph.reset(self._tokens.pop())

    def record(self, node: Node) -> None:
        """Append an operation to the tape.

        Args:
            node: The executed operation.
        """
        if self.consumed:
            msg = "graph was already consumed by a backward pass; start a new Graph"
            raise GraphError(msg)
        self.nodes.append(node)

    def backward(self, root: Tensor, grad: Array | None = None) -> None:
        """Propagate gradients from ``root`` to every leaf that requires them.

        Args:
            root: Output of an operation recorded on this graph.
            grad: Seed gradient; defaults to one for single-element roots.
        """
        if self.consumed:
            msg = "backward was already called on this graph"
            raise GraphError(msg)
        if root.graph is not self:
            msg = "root tensor was not recorded on this graph"
            raise GraphError(msg)
        pending: dict[int, Array] = {id(root): _seed(root, grad)}
        for node in reversed(self.nodes):
            upstream = pending.pop(id(node.output), None)
            if upstream is None:
                continue
            self.visited.append(node.op)
            for tensor, partial in zip(node.inputs, node.backward(upstream), strict=True):
                if partial is None or not tensor.requires_grad:
                    continue
                if tensor.graph is None:
                    tensor.accumulate(partial)
                    continue
                key = id(tensor)
                pending[key] = pending[key] + partial if key in pending else partial
        self.consumed = True


def _seed(root: Tensor, grad: Array | None) -> Array:
    if grad is not None:
        seed = np.asarray(grad, dtype=np.float64)
        if seed.shape != root.shape:
            msg = "seed gradient shape does not match root"
            raise ShapeError(msg, seed.shape, root.shape)
        return seed
    if root.size != 1:
        msg = "backward without a seed gradient needs a single-element root"
        raise ShapeError(msg, root.shape)
    return np.ones(root.shape, dtype=np.float64)


from wdce.domain.tensor import ops  # noqa: E402
