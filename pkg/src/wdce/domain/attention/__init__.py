"""Decoupling attention (band recalibration) and trajectory-wise attention."""
from __future__ import annotations

from wdce.domain.attention.blocks import (
    AttentionMap,
    decoupling_attention,
    decoupling_weights,
    recalibrate,
    trajectory_attention,
)
from wdce.domain.attention.params import DecouplingAttentionParams, TrajectoryAttentionParams

__all__ = [
    "AttentionMap",
    "DecouplingAttentionParams",
    "TrajectoryAttentionParams",
    "decoupling_attention",
    "decoupling_weights",
    "recalibrate",
    "trajectory_attention",
]
