"""Differentiable operations over :class:`~wdce.domain.tensor.engine.Tensor`.

Every operation computes its forward value eagerly and, when a graph is active and
an input requires gradients, records a closure returning the exact analytic
vector-Jacobian product for each input. Binary operations broadcast by aligning
trailing axes, as numpy does; the backward pass sums gradients back over the
broadcast axes.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from wdce.domain.tensor.engine import Node, Tensor, as_tensor, current_graph
from wdce.lib.exceptions import ShapeError

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from wdce.lib.types import Array, Axes, Shape

__all__ = [
    "add",
    "batched_matmul",
    "broadcast_to",
    "concatenate",
    "conv1d",
    "conv2d",
    "div",
    "exp",
    "index",
    "l2_norm",
    "log",
    "log_softmax",
    "matmul",
    "mean",
    "mul",
    "neg",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "sub",
    "sum",
    "transpose",
]


def _emit(
    op: str,
    value: Array,
    inputs: tuple[Tensor, ...],
    backward: Callable[[Array], tuple[Array | None, ...]],
) -> Tensor:
    graph = current_graph()
    track = graph is not None and any(tensor.requires_grad for tensor in inputs)
    out = Tensor(value, requires_grad=track)
    if track and graph is not None:
        out.graph = graph
        graph.record(Node(op, inputs, out, backward))
    return out


def _unbroadcast(grad: Array, shape: Shape) -> Array:
    """Sum ``grad`` down to ``shape`` after trailing-axis broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    squeezed = tuple(axis for axis, extent in enumerate(shape) if extent == 1 and grad.shape[axis] != 1)
    if squeezed:
        grad = grad.sum(axis=squeezed, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Shape:
    try:
        return tuple(np.broadcast_shapes(a.shape, b.shape))
    except ValueError as exc:
        msg = f"{op}: operand shapes do not broadcast"
        raise ShapeError(msg, a.shape, b.shape) from exc


def _normalize_axes(axis: Axes, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    if any(not -ndim <= a < ndim for a in axes):
        msg = f"axis {axis} out of range for rank {ndim}"
        raise ShapeError(msg)
    return tuple(sorted({a % ndim for a in axes}))


def _expand_reduced(grad: Array, shape: Shape, axes: tuple[int, ...], keepdims: bool) -> Array:
    if not keepdims:
        grad = np.expand_dims(grad, axes)
    return np.broadcast_to(grad, shape)


# -- elementwise


def add(a: Any, b: Any) -> Tensor:
    """Elementwise ``a + b`` with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return _emit("add", a.data + b.data, (a, b), backward)


def sub(a: Any, b: Any) -> Tensor:
    """Elementwise ``a - b`` with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return _emit("sub", a.data - b.data, (a, b), backward)


def mul(a: Any, b: Any) -> Tensor:
    """Elementwise ``a * b`` with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)

    return _emit("mul", a.data * b.data, (a, b), backward)


def div(a: Any, b: Any) -> Tensor:
    """Elementwise ``a / b`` with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a, b)
    value = a.data / b.data

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return _unbroadcast(grad / b.data, a.shape), _unbroadcast(-grad * value / b.data, b.shape)

    return _emit("div", value, (a, b), backward)


def neg(x: Any) -> Tensor:
    """Elementwise negation."""
    x = as_tensor(x)
    return _emit("neg", -x.data, (x,), lambda grad: (-grad,))


def exp(x: Any) -> Tensor:
    """Elementwise exponential."""
    x = as_tensor(x)
    value = np.exp(x.data)
    return _emit("exp", value, (x,), lambda grad: (grad * value,))


def log(x: Any) -> Tensor:
    """Elementwise natural logarithm."""
    x = as_tensor(x)
    return _emit("log", np.log(x.data), (x,), lambda grad: (grad / x.data,))


def relu(x: Any) -> Tensor:
    """Elementwise ``max(x, 0)``; the derivative at zero is taken as zero."""
    x = as_tensor(x)
    mask = x.data > 0
    return _emit("relu", np.where(mask, x.data, 0.0), (x,), lambda grad: (grad * mask,))


def sigmoid(x: Any) -> Tensor:
    """Elementwise logistic function, evaluated without overflow."""
    x = as_tensor(x)
    value = np.exp(-np.logaddexp(0.0, -x.data))
    return _emit("sigmoid", value, (x,), lambda grad: (grad * value * (1.0 - value),))


# -- shape


def broadcast_to(x: Any, shape: Sequence[int]) -> Tensor:
    """Broadcast ``x`` to ``shape`` under trailing-axis alignment."""
    x = as_tensor(x)
    target = tuple(shape)
    try:
        value = np.broadcast_to(x.data, target).copy()
    except ValueError as exc:
        msg = "broadcast_to: shapes do not broadcast"
        raise ShapeError(msg, x.shape, target) from exc
    return _emit("broadcast_to", value, (x,), lambda grad: (_unbroadcast(grad, x.shape),))


def reshape(x: Any, shape: Sequence[int]) -> Tensor:
    """Row-major reshape."""
    x = as_tensor(x)
    try:
        value = x.data.reshape(tuple(shape))
    except ValueError as exc:
        msg = "reshape: element counts differ"
        raise ShapeError(msg, x.shape, tuple(shape)) from exc
    return _emit("reshape", value.copy(), (x,), lambda grad: (grad.reshape(x.shape),))


def transpose(x: Any, axes: Sequence[int] | None = None) -> Tensor:
    """Permute axes; ``None`` reverses them."""
    x = as_tensor(x)
    perm = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    if sorted(perm) != list(range(x.ndim)):
        msg = f"transpose: {perm} is not a permutation of the axes"
        raise ShapeError(msg, x.shape)
    inverse = tuple(int(i) for i in np.argsort(perm))
    value = np.require(x.data.transpose(perm), requirements=["C"])
    return _emit("transpose", value, (x,), lambda grad: (grad.transpose(inverse),))


def concatenate(tensors: Sequence[Any], axis: int = 0) -> Tensor:
    """Join tensors along ``axis``."""
    parts = tuple(as_tensor(t) for t in tensors)
    if not parts:
        msg = "concatenate needs at least one tensor"
        raise ShapeError(msg)
    try:
        value = np.concatenate([part.data for part in parts], axis=axis)
    except ValueError as exc:
        msg = "concatenate: shapes differ off the joined axis"
        raise ShapeError(msg, *(part.shape for part in parts)) from exc
    bounds = np.cumsum([part.shape[axis] for part in parts])[:-1]

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return tuple(np.split(grad, bounds, axis=axis))

    return _emit("concatenate", value, parts, backward)


def index(x: Any, key: Any) -> Tensor:
    """Slice or index ``x`` with numpy semantics; the gradient scatters back."""
    x = as_tensor(x)
    try:
        value = np.array(x.data[key], dtype=np.float64)
    except IndexError as exc:
        msg = f"index {key!r} out of range"
        raise ShapeError(msg, x.shape) from exc

    def backward(grad: Array) -> tuple[Array | None, ...]:
        full = np.zeros(x.shape, dtype=np.float64)
        np.add.at(full, key, grad)
        return (full,)

    return _emit("index", value, (x,), backward)


# -- reductions


def sum(x: Any, axis: Axes = None, *, keepdims: bool = False) -> Tensor:  # noqa: A001
    """Sum over ``axis`` (all axes by default)."""
    x = as_tensor(x)
    axes = _normalize_axes(axis, x.ndim)
    value = np.asarray(x.data.sum(axis=axes, keepdims=keepdims), dtype=np.float64)
    return _emit("sum", value, (x,), lambda grad: (_expand_reduced(grad, x.shape, axes, keepdims).copy(),))


def mean(x: Any, axis: Axes = None, *, keepdims: bool = False) -> Tensor:
    """Arithmetic mean over ``axis`` (all axes by default)."""
    x = as_tensor(x)
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes], dtype=np.int64))
    if count == 0:
        msg = "mean over an empty axis"
        raise ShapeError(msg, x.shape)
    value = np.asarray(x.data.mean(axis=axes, keepdims=keepdims), dtype=np.float64)
    return _emit("mean", value, (x,), lambda grad: (_expand_reduced(grad, x.shape, axes, keepdims) / count,))


def l2_norm(x: Any, axis: Axes = -1, *, keepdims: bool = False) -> Tensor:
    """Euclidean norm over ``axis``; the gradient at a zero vector is taken as zero."""
    x = as_tensor(x)
    axes = _normalize_axes(axis, x.ndim)
    norm = np.sqrt(np.sum(x.data * x.data, axis=axes, keepdims=True))
    value = norm if keepdims else np.squeeze(norm, axis=axes)

    def backward(grad: Array) -> tuple[Array | None, ...]:
        expanded = _expand_reduced(grad, x.shape, axes, keepdims)
        safe = np.where(norm > 0, norm, 1.0)
        return (np.where(norm > 0, expanded * x.data / safe, 0.0),)

    return _emit("l2_norm", np.asarray(value, dtype=np.float64), (x,), backward)


def softmax(x: Any, axis: int = -1) -> Tensor:
    """Softmax along ``axis``; the output sums to one along that axis."""
    x = as_tensor(x)
    if not -x.ndim <= axis < x.ndim or x.shape[axis] == 0:
        msg = f"softmax over an empty axis {axis}"
        raise ShapeError(msg, x.shape)
    shifted = np.exp(x.data - x.data.max(axis=axis, keepdims=True))
    value = shifted / shifted.sum(axis=axis, keepdims=True)

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return (value * (grad - np.sum(grad * value, axis=axis, keepdims=True)),)

    return _emit("softmax", value, (x,), backward)


def log_softmax(x: Any, axis: int = -1) -> Tensor:
    """Logarithm of :func:`softmax`, computed through log-sum-exp."""
    x = as_tensor(x)
    if not -x.ndim <= axis < x.ndim or x.shape[axis] == 0:
        msg = f"log_softmax over an empty axis {axis}"
        raise ShapeError(msg, x.shape)
    peak = x.data.max(axis=axis, keepdims=True)
    value = x.data - peak - np.log(np.sum(np.exp(x.data - peak), axis=axis, keepdims=True))
    probs = np.exp(value)

    def backward(grad: Array) -> tuple[Array | None, ...]:
        return (grad - probs * np.sum(grad, axis=axis, keepdims=True),)

    return _emit("log_softmax", value, (x,), backward)


# -- products


def matmul(a: Any, b: Any) -> Tensor:
    """Matrix product over the last two axes, broadcasting leading (batch) axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:  # noqa: PLR2004
        msg = "matmul: inner extents differ or operand rank < 2"
        raise ShapeError(msg, a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError as exc:
        msg = "matmul: batch extents do not broadcast"
        raise ShapeError(msg, a.shape, b.shape) from exc

    def backward(grad: Array) -> tuple[Array | None, ...]:
        grad_a = np.matmul(grad, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), grad)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return _emit("matmul", np.matmul(a.data, b.data), (a, b), backward)


def batched_matmul(a: Any, b: Any) -> Tensor:
    """Matrix product of two stacks of matrices with identical batch extents."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 3 or a.shape[:-2] != b.shape[:-2]:  # noqa: PLR2004
        msg = "batched_matmul: batch extents differ"
        raise ShapeError(msg, a.shape, b.shape)
    return matmul(a, b)


# -- convolutions


def conv1d(x: Any, weight: Any, bias: Any | None = None, *, padding: int = 0) -> Tensor:
    """Stride-1 cross-correlation over the last axis.

    Args:
        x: Input of shape ``N x C_in x L``.
        weight: Kernel of shape ``C_out x C_in x k``.
        bias: Optional ``C_out`` offsets.
        padding: Zeros added on both ends of the last axis.

    Returns:
        Output of shape ``N x C_out x (L + 2*padding - k + 1)``.
    """
    x, weight = as_tensor(x), as_tensor(weight)
    inputs: tuple[Tensor, ...] = (x, weight) if bias is None else (x, weight, as_tensor(bias))
    if x.ndim != 3 or weight.ndim != 3 or x.shape[1] != weight.shape[1]:  # noqa: PLR2004
        msg = "conv1d: expected N x C_in x L input and C_out x C_in x k kernel"
        raise ShapeError(msg, x.shape, weight.shape)
    if bias is not None and inputs[2].shape != (weight.shape[0],):
        msg = "conv1d: bias must have one entry per output channel"
        raise ShapeError(msg, inputs[2].shape, (weight.shape[0],))
    width = weight.shape[2]
    padded = np.pad(x.data, ((0, 0), (0, 0), (padding, padding)))
    out_len = padded.shape[2] - width + 1
    if out_len < 1:
        msg = "conv1d: kernel wider than the padded input"
        raise ShapeError(msg, x.shape, weight.shape)
    windows = sliding_window_view(padded, width, axis=2)
    value = np.einsum("nilk,oik->nol", windows, weight.data, optimize=True)
    if bias is not None:
        value = value + inputs[2].data[None, :, None]

    def backward(grad: Array) -> tuple[Array | None, ...]:
        grad_w = np.einsum("nol,nilk->oik", grad, windows, optimize=True)
        grad_padded = np.zeros_like(padded)
        for k in range(width):
            grad_padded[:, :, k : k + out_len] += np.einsum("nol,oi->nil", grad, weight.data[:, :, k], optimize=True)
        grad_x = grad_padded[:, :, padding : padding + x.shape[2]]
        if bias is None:
            return grad_x, grad_w
        return grad_x, grad_w, grad.sum(axis=(0, 2))

    return _emit("conv1d", value, inputs, backward)


def conv2d(x: Any, weight: Any, bias: Any | None = None, *, padding: tuple[int, int] = (0, 0)) -> Tensor:
    """Stride-1 cross-correlation over the last two axes.

    Args:
        x: Input of shape ``N x C_in x H x W``.
        weight: Kernel of shape ``C_out x C_in x kh x kw``.
        bias: Optional ``C_out`` offsets.
        padding: Zeros added on both ends of the ``H`` and ``W`` axes.

    Returns:
        Output of shape ``N x C_out x H' x W'``.
    """
    x, weight = as_tensor(x), as_tensor(weight)
    inputs: tuple[Tensor, ...] = (x, weight) if bias is None else (x, weight, as_tensor(bias))
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:  # noqa: PLR2004
        msg = "conv2d: expected N x C_in x H x W input and C_out x C_in x kh x kw kernel"
        raise ShapeError(msg, x.shape, weight.shape)
    if bias is not None and inputs[2].shape != (weight.shape[0],):
        msg = "conv2d: bias must have one entry per output channel"
        raise ShapeError(msg, inputs[2].shape, (weight.shape[0],))
    pad_h, pad_w = padding
    kh, kw = weight.shape[2], weight.shape[3]
    padded = np.pad(x.data, ((0, 0), (0, 0), (pad_h, pad_h), (pad_w, pad_w)))
    out_h, out_w = padded.shape[2] - kh + 1, padded.shape[3] - kw + 1
    if out_h < 1 or out_w < 1:
        msg = "conv2d: kernel larger than the padded input"
        raise ShapeError(msg, x.shape, weight.shape)
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    value = np.einsum("nihwab,oiab->nohw", windows, weight.data, optimize=True)
    if bias is not None:
        value = value + inputs[2].data[None, :, None, None]

    def backward(grad: Array) -> tuple[Array | None, ...]:
        grad_w = np.einsum("nohw,nihwab->oiab", grad, windows, optimize=True)
        grad_padded = np.zeros_like(padded)
        for a in range(kh):
            for b in range(kw):
                grad_padded[:, :, a : a + out_h, b : b + out_w] += np.einsum(
                    "nohw,oi->nihw", grad, weight.data[:, :, a, b], optimize=True
                )
        grad_x = grad_padded[:, :, pad_h : pad_h + x.shape[2], pad_w : pad_w + x.shape[3]]
        if bias is None:
            return grad_x, grad_w
        return grad_x, grad_w, grad.sum(axis=(0, 2, 3))

    return _emit("conv2d", value, inputs, backward)
