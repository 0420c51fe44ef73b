from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wdce.domain.tensor import Graph, Rng, Tensor, dump, grad_check, no_grad, ops
from wdce.lib.exceptions import ConfigurationError, DataFormatError, GradientCheckError, GraphError, ShapeError

finite = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


def test_add_broadcasts_trailing_axes_and_unbroadcasts_gradients() -> None:
    a = Tensor(np.ones((2, 3)), requires_grad=True)
    b = Tensor(np.arange(3.0), requires_grad=True)
    with Graph() as graph:
        out = ops.sum(ops.add(a, b))
    graph.backward(out)
    np.testing.assert_array_equal(a.grad, np.ones((2, 3)))
    np.testing.assert_array_equal(b.grad, np.full(3, 2.0))


def test_shape_error_reports_both_shapes() -> None:
    with pytest.raises(ShapeError) as excinfo:
        ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((4,))))
    assert "(2, 3)" in str(excinfo.value)
    assert "(4,)" in str(excinfo.value)


def test_matmul_rejects_inner_mismatch() -> None:
    with pytest.raises(ShapeError):
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_second_backward_on_the_same_graph_fails() -> None:
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Graph() as graph:
        y = ops.sum(ops.mul(x, x))
    graph.backward(y)
    np.testing.assert_array_equal(x.grad, [2.0, 4.0])
    with pytest.raises(GraphError):
        graph.backward(y)


def test_backward_on_untracked_value_fails() -> None:
    with pytest.raises(GraphError):
        Tensor([1.0]).backward()


def test_no_grad_records_nothing() -> None:
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Graph() as graph, no_grad():
        y = ops.mul(x, 3.0)
    assert graph.nodes == []
    assert y.is_leaf


def test_shared_subexpression_accumulates_gradient() -> None:
    x = Tensor([3.0], requires_grad=True)
    with Graph() as graph:
        y = ops.mul(x, 2.0)
        z = ops.sum(ops.add(ops.mul(y, y), y))
    graph.backward(z)
    # z = 4x^2 + 2x
    np.testing.assert_allclose(x.grad, [8.0 * 3.0 + 2.0])


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 5), elements=finite))
def test_softmax_rows_sum_to_one(values: np.ndarray) -> None:
    probs = ops.softmax(Tensor(values), axis=1).data
    np.testing.assert_allclose(probs.sum(axis=1), np.ones(3), atol=1e-12)
    assert np.all(probs >= 0.0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 4), elements=finite))
def test_log_softmax_matches_log_of_softmax(values: np.ndarray) -> None:
    expected = np.log(ops.softmax(Tensor(values), axis=1).data)
    np.testing.assert_allclose(ops.log_softmax(Tensor(values), axis=1).data, expected, atol=1e-9)


def test_softmax_over_empty_axis_fails() -> None:
    with pytest.raises(ShapeError):
        ops.softmax(Tensor(np.zeros((2, 0))), axis=1)


def test_mean_over_empty_axis_fails() -> None:
    with pytest.raises(ShapeError):
        ops.mean(Tensor(np.zeros((0, 3))), axis=0)


def weigh(t: Tensor) -> Tensor:
    """Scalar read-out with distinct weights per coordinate."""
    weights = np.cos(np.arange(t.size, dtype=np.float64).reshape(t.shape) + 0.5)
    return ops.sum(ops.mul(t, weights))


OP_CASES = {
    "add": lambda a, b: weigh(ops.add(a, ops.transpose(b))),
    "sub": lambda a, b: weigh(ops.sub(a, ops.index(ops.transpose(b), 0))),
    "mul": lambda a, b: weigh(ops.mul(a, ops.transpose(b))),
    "div": lambda a, b: weigh(ops.div(a, ops.add(ops.exp(ops.transpose(b)), 1.0))),
    "neg": lambda a, b: weigh(ops.neg(ops.matmul(a, b))),
    "exp": lambda a, b: weigh(ops.exp(ops.mul(a, 0.5))),
    "log": lambda a, b: weigh(ops.log(ops.add(ops.mul(a, a), 1.0))),
    "relu": lambda a, b: weigh(ops.relu(ops.matmul(a, b))),
    "sigmoid": lambda a, b: weigh(ops.sigmoid(ops.matmul(a, b))),
    "broadcast_to": lambda a, b: weigh(ops.broadcast_to(a, (2, 3, 4))),
    "reshape": lambda a, b: weigh(ops.reshape(a, (2, 6))),
    "transpose": lambda a, b: weigh(ops.transpose(ops.reshape(b, (2, 2, 3)), (2, 0, 1))),
    "concatenate": lambda a, b: weigh(ops.concatenate([a, ops.transpose(b)], axis=1)),
    "index": lambda a, b: weigh(ops.index(a, (slice(None), [0, 2, 2]))),
    "sum": lambda a, b: ops.mul(ops.sum(a), weigh(ops.sum(b, axis=1, keepdims=True))),
    "mean": lambda a, b: ops.add(ops.mean(ops.mul(a, a)), weigh(ops.mean(b, axis=0))),
    "l2_norm": lambda a, b: weigh(ops.l2_norm(ops.matmul(a, b), axis=1)),
    "softmax": lambda a, b: weigh(ops.softmax(ops.matmul(a, b), axis=1)),
    "log_softmax": lambda a, b: weigh(ops.log_softmax(ops.matmul(a, b), axis=0)),
    "matmul": lambda a, b: weigh(ops.matmul(a, b)),
    "batched_matmul": lambda a, b: weigh(ops.batched_matmul(ops.reshape(a, (2, 3, 2)), ops.reshape(b, (2, 2, 3)))),
    "conv1d": lambda a, b: weigh(ops.conv1d(ops.reshape(a, (1, 3, 4)), ops.reshape(b, (2, 3, 2)), padding=1)),
    "conv2d": lambda a, b: weigh(
        ops.conv2d(ops.reshape(a, (1, 1, 3, 4)), ops.reshape(ops.index(b, slice(0, 2)), (3, 1, 2, 1)), padding=(1, 0))
    ),
}


def test_every_op_has_a_gradient_case() -> None:
    assert sorted(OP_CASES) == sorted(ops.__all__)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("name", sorted(OP_CASES))
def test_gradients_match_finite_differences(name: str, seed: int) -> None:
    stream = Rng(seed).split("grad", name)
    a = Tensor(stream.split("a").normal((3, 4)))
    b = Tensor(stream.split("b").normal((4, 3)))
    assert grad_check(OP_CASES[name], [a, b]) < 1e-6


def test_full_reductions_stay_scalar() -> None:
    assert Tensor(0.0).shape == ()
    assert ops.mean(Tensor([1.0, 2.0])).shape == ()
    assert ops.sum(Tensor(np.ones((2, 3)))).shape == ()
    assert ops.transpose(Tensor(2.5)).shape == ()


def test_scalar_chain_backpropagates() -> None:
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    with Graph() as graph:
        loss = ops.neg(ops.mean(ops.index(x, (np.array([0, 1]), np.array([2, 0])))))
    assert loss.shape == ()
    graph.backward(loss)
    np.testing.assert_array_equal(x.grad, [[0.0, 0.0, -0.5], [-0.5, 0.0, 0.0]])


def test_index_gradient_scatters_with_repeated_keys() -> None:
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    with Graph() as graph:
        picked = x[np.array([0, 0, 1]), np.array([2, 2, 0])]
        total = ops.sum(picked)
    graph.backward(total)
    np.testing.assert_array_equal(x.grad, [[0.0, 0.0, 2.0], [1.0, 0.0, 0.0]])


def test_conv1d_matches_direct_correlation(rng: Rng) -> None:
    x = rng.split("x").normal((2, 3, 7))
    w = rng.split("w").normal((4, 3, 3))
    out = ops.conv1d(Tensor(x), Tensor(w), padding=1).data
    padded = np.pad(x, ((0, 0), (0, 0), (1, 1)))
    expected = np.zeros((2, 4, 7))
    for t in range(7):
        expected[:, :, t] = np.einsum("nik,oik->no", padded[:, :, t : t + 3], w)
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_conv_gradients(rng: Rng) -> None:
    x = Tensor(rng.split("x").normal((2, 3, 6, 4)))
    w = Tensor(rng.split("w").normal((2, 3, 3, 1)))
    b = Tensor(rng.split("b").normal((2,)))
    weights = rng.split("out").normal((2, 2, 6, 4))
    error = grad_check(lambda x_, w_, b_: ops.sum(ops.mul(ops.conv2d(x_, w_, b_, padding=(1, 0)), weights)), [x, w, b])
    assert error < 1e-6


def test_grad_check_flags_non_finite_difference() -> None:
    x = Tensor([1e-7])
    with np.errstate(invalid="ignore"), pytest.raises(GradientCheckError) as excinfo:
        grad_check(lambda x_: ops.sum(ops.log(x_)), [x], step=1e-6)
    assert excinfo.value.coordinate == (0,)


def test_rng_streams_depend_only_on_seed_and_path() -> None:
    first = Rng(7).split("noise", 3).normal((4,))
    Rng(7).split("noise", 2).normal((100,))
    again = Rng(7).split("noise", 3).normal((4,))
    other = Rng(7).split("noise", 4).normal((4,))
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)


def test_rng_rejects_negative_seed_and_keys() -> None:
    with pytest.raises(ConfigurationError):
        Rng(-1)
    with pytest.raises(ConfigurationError):
        Rng(0).split(-3)


def test_tensor_dump_layout() -> None:
    data = dump.to_bytes(Tensor(np.arange(6.0).reshape(2, 3)))
    assert data[:4] == b"WDCT"
    assert int.from_bytes(data[4:8], "little") == 2
    assert int.from_bytes(data[8:16], "little") == 2
    assert int.from_bytes(data[16:24], "little") == 3
    assert len(data) == 24 + 6 * 8
    np.testing.assert_array_equal(dump.from_bytes(data).data, np.arange(6.0).reshape(2, 3))


def test_truncated_dump_reports_offset() -> None:
    data = dump.to_bytes(Tensor(np.ones(4)))
    with pytest.raises(DataFormatError) as excinfo:
        dump.from_bytes(data[:-5])
    assert excinfo.value.offset == 16


def test_bad_magic_reports_offset_zero() -> None:
    with pytest.raises(DataFormatError) as excinfo:
        dump.from_bytes(b"XXXX" + dump.to_bytes(Tensor([1.0]))[4:])
    assert excinfo.value.offset == 0
