from __future__ import annotations

import numpy as np
import pytest

from wdce.domain.attention import (
    DecouplingAttentionParams,
    TrajectoryAttentionParams,
    decoupling_attention,
    decoupling_weights,
    trajectory_attention,
)
from wdce.domain.tensor import Rng, Tensor, grad_check, ops
from wdce.domain.wavelet import dwt, to_trajectories
from wdce.lib.exceptions import ConfigurationError, ShapeError


def test_zero_decoupling_parameters_halve_both_bands(rng: Rng) -> None:
    embed = Tensor(rng.split("x").normal((2, 3, 8, 4)))
    low, high = dwt(to_trajectories(embed))
    salient, subtle = decoupling_attention(embed, low, high, DecouplingAttentionParams.zeros(3, 8))
    assert salient.shape == (2, 3, 4, 4)
    assert subtle.shape == (2, 3, 4, 4)
    np.testing.assert_allclose(ops.mul(to_trajectories(salient), 2.0).data, low.data, atol=1e-15)
    np.testing.assert_allclose(ops.mul(to_trajectories(subtle), 2.0).data, high.data, atol=1e-15)


def test_decoupling_weights_lie_strictly_inside_unit_interval(rng: Rng) -> None:
    params = DecouplingAttentionParams.init(3, 10, rng.split("params"))
    embed = Tensor(rng.split("x").normal((4, 3, 10, 5), scale=3.0))
    a_low, a_high = decoupling_weights(embed, params)
    assert a_low.shape == (4, 1, 5)
    for weights in (a_low.data, a_high.data):
        assert np.all(weights > 0.0)
        assert np.all(weights < 1.0)


def test_decoupling_rejects_embedding_of_wrong_length(rng: Rng) -> None:
    params = DecouplingAttentionParams.init(3, 8, rng)
    with pytest.raises(ShapeError):
        decoupling_weights(Tensor(np.zeros((1, 3, 6, 4))), params)


@pytest.mark.parametrize(("channels", "frames", "kernel"), [(0, 8, 3), (2, 7, 3), (2, 8, 2)])
def test_decoupling_parameters_validate_extents(channels: int, frames: int, kernel: int) -> None:
    with pytest.raises(ConfigurationError):
        DecouplingAttentionParams.zeros(channels, frames, kernel)


def test_trajectory_attention_rows_are_distributions(rng: Rng) -> None:
    params = TrajectoryAttentionParams.init(4, 6, rng.split("params"), latent=5)
    subtle = Tensor(rng.split("x").normal((3, 4, 5, 6), scale=4.0))
    enhanced, att = trajectory_attention(subtle, params)
    assert enhanced.shape == subtle.shape
    assert att.values.shape == (3, 4, 6)
    assert att.row_sum_error() < 1e-12
    assert np.all(att.values.data >= 0.0)
    assert att.flattened().shape == (3, 24)


def test_zero_trajectory_attention_is_uniform(rng: Rng) -> None:
    subtle = Tensor(rng.normal((2, 3, 4, 5)))
    enhanced, att = trajectory_attention(subtle, TrajectoryAttentionParams.zeros(3, 5, latent=2))
    np.testing.assert_array_equal(att.values.data, np.full((2, 3, 5), 0.2))
    np.testing.assert_allclose(enhanced.data, subtle.data / 5.0, atol=1e-15)


def test_trajectory_attention_checks_joint_count(rng: Rng) -> None:
    params = TrajectoryAttentionParams.init(3, 5, rng)
    with pytest.raises(ShapeError):
        trajectory_attention(Tensor(np.ones((1, 3, 4, 6))), params)


def test_trajectory_attention_rejects_empty_latent(rng: Rng) -> None:
    with pytest.raises(ConfigurationError):
        TrajectoryAttentionParams.init(3, 5, rng, latent=0)


def test_attention_gradients(rng: Rng) -> None:
    decouple = DecouplingAttentionParams.init(2, 4, rng.split("da"))
    traj = TrajectoryAttentionParams.init(2, 3, rng.split("ta"), latent=2)
    embed = Tensor(rng.split("x").normal((2, 2, 4, 3)))
    weights = rng.split("w").normal((2, 2, 2, 3))

    def objective(x: Tensor, lw: Tensor, cw: Tensor, aw: Tensor, bw: Tensor) -> Tensor:
        decouple.linear_w, decouple.conv_w = lw, cw
        traj.mlp_a_w, traj.mlp_b_w = aw, bw
        low, high = dwt(to_trajectories(x))
        _, subtle = decoupling_attention(x, low, high, decouple)
        enhanced, _ = trajectory_attention(subtle, traj)
        return ops.sum(ops.mul(enhanced, weights))

    point = [embed, decouple.linear_w, decouple.conv_w, traj.mlp_a_w, traj.mlp_b_w]
    assert grad_check(objective, point) < 1e-6


@pytest.mark.parametrize("scale", [0.25, 3.0, 10.0])
def test_trajectory_attention_argmax_ignores_positive_scale(rng: Rng, scale: float) -> None:
    params = TrajectoryAttentionParams.init(4, 6, rng.split("params"), latent=5)
    subtle = rng.split("x").normal((3, 4, 5, 6))
    _, att = trajectory_attention(Tensor(subtle), params)
    _, scaled = trajectory_attention(Tensor(subtle * scale), params)
    np.testing.assert_array_equal(np.argmax(scaled.values.data, axis=2), np.argmax(att.values.data, axis=2))
