"""Synthetic confusable-action generator.

Each pair of classes shares a salient sinusoid bank below ``f_split``; the two
classes of a pair carry the same near-Nyquist subtle component in opposite phase,
scaled by ``rho``. Only the subtle component and the noise tell them apart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from wdce.domain.backbone import build_graph
from wdce.domain.data.sequence import Dataset, SkeletonSequence
from wdce.domain.tensor import Rng
from wdce.domain.wavelet import dwt_array
from wdce.lib.log import get_logger

if TYPE_CHECKING:
    from wdce.domain.data.schemas import SynthSpec
    from wdce.lib.types import Array

__all__ = ["SinusoidBank", "discriminability_ratio", "generate", "rest_pose", "salient_bank", "subtle_bank"]

logger = get_logger()


@dataclass(frozen=True, slots=True)
class SinusoidBank:
    """Sum of sinusoids with per-joint, per-coordinate amplitudes and phases."""

    freqs: Array
    amplitudes: Array
    phases: Array

    def render(self, frames: int, phase_shift: float = 0.0) -> Array:
        """Evaluate the bank at ``t = 0..frames-1`` as ``V x T x 3``."""
        t = np.arange(frames, dtype=np.float64)
        signal = np.zeros((self.amplitudes.shape[1], frames, 3))
        for freq, amplitude, phase in zip(self.freqs, self.amplitudes, self.phases, strict=True):
            angle = 2.0 * math.pi * freq * t[None, :, None] + phase[:, None, :] + phase_shift
            signal += amplitude[:, None, :] * np.sin(angle)
        return signal


def salient_bank(spec: SynthSpec, pair: int) -> SinusoidBank:
    """Low-frequency bank shared by both classes of ``pair``."""
    rng = Rng(spec.seed).split("salient", pair)
    count = spec.salient_components
    return SinusoidBank(
        freqs=rng.split("freq").uniform(1.0 / spec.frames, spec.salient_max_freq, (count,)),
        amplitudes=rng.split("amplitude").uniform(0.5, 1.0, (count, spec.joints, 3)),
        phases=rng.split("phase").uniform(0.0, 2.0 * math.pi, (count, spec.joints, 3)),
    )


def subtle_bank(spec: SynthSpec, pair: int) -> SinusoidBank:
    """Near-Nyquist bank of ``pair``; class ``2p + 1`` renders it shifted by ``pi``."""
    rng = Rng(spec.seed).split("subtle", pair)
    return SinusoidBank(
        freqs=rng.split("freq").uniform(spec.subtle_min_freq, 0.5, (1,)),
        amplitudes=spec.rho * rng.split("amplitude").uniform(0.5, 1.0, (1, spec.joints, 3)),
        phases=rng.split("phase").uniform(0.0, 2.0 * math.pi, (1, spec.joints, 3)),
    )


def rest_pose(spec: SynthSpec) -> Array:
    """Static ``V x 3`` joint positions: each joint sits a unit step from its parent.

    Constant in time, so it lands entirely in the low band.
    """
    pose = np.zeros((spec.joints, 3))
    if not spec.rest_pose:
        return pose
    parents = build_graph(spec.edges, spec.joints).parents()
    directions = Rng(spec.seed).split("rest").normal((spec.joints, 3))
    directions /= np.maximum(np.linalg.norm(directions, axis=1, keepdims=True), 1e-12)
    order = sorted(range(spec.joints), key=lambda joint: _depth(parents, joint))
    for joint in order:
        parent = parents[joint]
        if parent != joint:
            pose[joint] = pose[parent] + directions[joint]
    return pose


def _depth(parents: list[int], joint: int) -> int:
    depth = 0
    while parents[joint] != joint:
        joint = parents[joint]
        depth += 1
    return depth


def generate(spec: SynthSpec) -> Dataset:
    """Render ``samples_per_class`` sequences for each of the ``2 * pairs`` classes.

    Sample ``i`` of class ``k`` gets id ``k * samples_per_class + i`` and draws its
    noise from the stream ``(seed, "noise", id)``, so every sample is reproducible
    on its own.
    """
    pose = rest_pose(spec)[:, None, :]
    dataset = Dataset(joints=spec.joints, frames=spec.frames, classes=spec.classes, edges=tuple(spec.edges))
    root = Rng(spec.seed)
    for pair in range(spec.pairs):
        salient = salient_bank(spec, pair).render(spec.frames)
        subtle = subtle_bank(spec, pair)
        for member in (0, 1):
            label = 2 * pair + member
            clean = pose + salient + subtle.render(spec.frames, phase_shift=math.pi * member)
            for i in range(spec.samples_per_class):
                sample_id = label * spec.samples_per_class + i
                noise = root.split("noise", sample_id).normal(clean.shape, spec.sigma) if spec.sigma else 0.0
                dataset.append(SkeletonSequence(joints=clean + noise, label=label, sample_id=sample_id))
    logger.info("dataset_generated", samples=len(dataset), classes=spec.classes, seed=spec.seed)
    return dataset


def discriminability_ratio(dataset: Dataset) -> float:
    """High-band over low-band distance between the class means of each confusable pair.

    Class means are reshaped to ``3V x T`` trajectories and split with the Haar
    transform; the ratio of the mean high-band distance to the mean low-band
    distance over pairs ``(2p, 2p + 1)`` is returned. Two identical bands give 1.
    """
    coords = dataset.coordinates()
    labels = dataset.labels
    high: list[float] = []
    low: list[float] = []
    for pair in range(dataset.classes // 2):
        members = [coords[labels == 2 * pair + j] for j in (0, 1)]
        if any(len(group) == 0 for group in members):
            continue
        means = [group.mean(axis=0).transpose(0, 2, 1).reshape(-1, dataset.frames) for group in members]
        (low_a, high_a), (low_b, high_b) = dwt_array(means[0]), dwt_array(means[1])
        low.append(float(np.linalg.norm(low_a - low_b)))
        high.append(float(np.linalg.norm(high_a - high_b)))
    low_mean, high_mean = (float(np.mean(low)) if low else 0.0), (float(np.mean(high)) if high else 0.0)
    if low_mean == 0.0:
        return 1.0 if high_mean == 0.0 else math.inf
    return high_mean / low_mean
