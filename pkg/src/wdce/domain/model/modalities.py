"""Joint, bone and motion input streams, and score-level fusion."""
from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from wdce.lib.constants import MODALITIES
from wdce.lib.exceptions import ConfigurationError, ShapeError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from wdce.domain.backbone import SkeletonGraph
    from wdce.lib.types import Array, Modality

__all__ = ["bones", "derive_modalities", "ensemble_logits", "modality_inputs", "motion"]


def _check(coords: Array, graph: SkeletonGraph | None = None) -> None:
    if coords.ndim != 4 or (graph is not None and coords.shape[3] != graph.joints):  # noqa: PLR2004
        msg = "expected N x C x T x V coordinates matching the skeleton"
        raise ShapeError(msg, coords.shape)


def bones(coords: Array, graph: SkeletonGraph) -> Array:
    """``joint[v] - joint[parent(v)]`` over the breadth-first tree from joint 0; the root bone is 0.

    Raises:
        ConfigurationError: If the skeleton is disconnected.
    """
    _check(coords, graph)
    parents = graph.parents(root=0)
    return coords - coords[..., parents]


def motion(coords: Array) -> Array:
    """Forward difference over time, ``x[t + 1] - x[t]``, with the last frame zero."""
    _check(coords)
    out = np.zeros_like(coords)
    out[:, :, :-1, :] = coords[:, :, 1:, :] - coords[:, :, :-1, :]
    return out


def derive_modalities(coords: Array, graph: SkeletonGraph) -> dict[str, Array]:
    """All four streams of ``N x C x T x V`` joint coordinates."""
    bone = bones(coords, graph)
    return {
        "joint": coords,
        "bone": bone,
        "joint_motion": motion(coords),
        "bone_motion": motion(bone),
    }


def modality_inputs(coords: Array, graph: SkeletonGraph, modality: Modality | str) -> Array:
    """One stream, computed without deriving the others."""
    if modality == "joint":
        return coords
    if modality == "bone":
        return bones(coords, graph)
    if modality == "joint_motion":
        return motion(coords)
    if modality == "bone_motion":
        return motion(bones(coords, graph))
    msg = f"unknown modality {modality!r}; expected one of {', '.join(MODALITIES)}"
    raise ConfigurationError(msg)


def ensemble_logits(logits: Sequence[Array]) -> Array:
    """Average the fused logits of several models."""
    if not logits:
        msg = "ensemble needs at least one set of logits"
        raise ConfigurationError(msg)
    shapes = {item.shape for item in logits}
    if len(shapes) != 1:
        msg = "ensemble members disagree on logit shape"
        raise ShapeError(msg, *shapes)
    return np.mean(np.stack(logits), axis=0)
