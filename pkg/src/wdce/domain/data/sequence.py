"""Skeleton sequences and datasets."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from wdce.lib.exceptions import LabelError, ShapeError

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from wdce.lib.types import Array

__all__ = ["Dataset", "SkeletonSequence"]


@dataclass(frozen=True, slots=True)
class SkeletonSequence:
    """One sample: ``V x T x 3`` joint coordinates with its class."""

    joints: Array
    label: int
    sample_id: int

    def __post_init__(self) -> None:
        values = np.asarray(self.joints, dtype=np.float64)
        if values.ndim != 3 or values.shape[2] != 3 or values.shape[1] % 2:  # noqa: PLR2004
            msg = f"sample {self.sample_id}: joints must be V x T x 3 with even T"
            raise ShapeError(msg, values.shape)
        if not np.all(np.isfinite(values)):
            msg = f"sample {self.sample_id}: non-finite coordinates"
            raise ShapeError(msg, values.shape)
        if self.label < 0:
            msg = f"sample {self.sample_id}: negative label {self.label}"
            raise LabelError(msg)
        object.__setattr__(self, "joints", values)

    @property
    def frames(self) -> int:
        """Frame count ``T``."""
        return self.joints.shape[1]


@dataclass(slots=True)
class Dataset:
    """Ordered collection of sequences sharing one skeleton and frame count."""

    joints: int
    frames: int
    classes: int
    edges: tuple[tuple[int, int], ...]
    sequences: list[SkeletonSequence] = field(default_factory=list)

    def __post_init__(self) -> None:
        for sequence in self.sequences:
            self._check(sequence)

    def _check(self, sequence: SkeletonSequence) -> None:
        if sequence.joints.shape[:2] != (self.joints, self.frames):
            msg = f"sample {sequence.sample_id} does not match the dataset's (V, T)"
            raise ShapeError(msg, sequence.joints.shape, (self.joints, self.frames, 3))
        if sequence.label >= self.classes:
            msg = f"sample {sequence.sample_id}: label {sequence.label} outside [0, {self.classes})"
            raise LabelError(msg)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[SkeletonSequence]:
        return iter(self.sequences)

    def append(self, sequence: SkeletonSequence) -> None:
        """Add one sequence after validating it."""
        self._check(sequence)
        self.sequences.append(sequence)

    def subset(self, indices: Sequence[int]) -> Dataset:
        """New dataset holding the sequences at ``indices``, in that order."""
        return Dataset(
            joints=self.joints,
            frames=self.frames,
            classes=self.classes,
            edges=self.edges,
            sequences=[self.sequences[i] for i in indices],
        )

    @property
    def labels(self) -> np.ndarray:
        """Labels in sample order."""
        return np.array([sequence.label for sequence in self.sequences], dtype=np.int64)

    @property
    def sample_ids(self) -> np.ndarray:
        """Sample ids in sample order."""
        return np.array([sequence.sample_id for sequence in self.sequences], dtype=np.int64)

    def class_counts(self) -> dict[int, int]:
        """Samples per class, every class present (possibly with 0)."""
        counts = Counter(sequence.label for sequence in self.sequences)
        return {k: counts.get(k, 0) for k in range(self.classes)}

    def coordinates(self) -> Array:
        """Stack every sample as ``N x 3 x T x V``."""
        if not self.sequences:
            return np.zeros((0, 3, self.frames, self.joints))
        return np.stack([sequence.joints.transpose(2, 1, 0) for sequence in self.sequences])
