"""Synthetic dataset generator parameters."""
from __future__ import annotations

from pydantic import Field, model_validator

from wdce.lib.constants import DEFAULT_SEED, DEFAULT_SKELETON_EDGES
from wdce.lib.schema import BaseModel

__all__ = ["SynthSpec"]


class SynthSpec(BaseModel):
    """Confusable-pair skeleton generator settings.

    Every pair of classes shares a low-frequency sinusoid bank; the two classes of
    a pair differ only by a weak near-Nyquist component in opposite phase.
    """

    pairs: int = Field(default=3, ge=1, description="Number of confusable class pairs (K = 2 * pairs).")
    joints: int = Field(default=7, ge=1, description="Joint count V.")
    frames: int = Field(default=32, ge=2, description="Frame count T (even).")
    rho: float = Field(default=0.15, ge=0.0, lt=1.0, description="Subtle amplitude relative to salient.")
    sigma: float = Field(default=0.05, ge=0.0, description="Gaussian noise scale.")
    samples_per_class: int = Field(default=100, ge=1)
    f_split: float = Field(default=0.25, gt=0.0, lt=0.5, description="Frequency separating the two banks (cycles/frame).")
    salient_components: int = Field(default=2, ge=1, description="Sinusoids per salient bank.")
    salient_max_freq: float = Field(default=0.1, gt=0.0, lt=0.5)
    subtle_min_freq: float = Field(default=0.48, gt=0.0, le=0.5)
    rest_pose: bool = Field(default=True, description="Add static joint offsets shared by all classes.")
    edges: list[tuple[int, int]] = Field(default_factory=lambda: [tuple(edge) for edge in DEFAULT_SKELETON_EDGES])
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_bands(self) -> SynthSpec:
        if self.frames % 2:
            msg = f"frame count must be even, got {self.frames}"
            raise ValueError(msg)
        if not self.salient_max_freq < self.f_split <= self.subtle_min_freq:
            msg = "f_split must separate the salient band from the subtle band"
            raise ValueError(msg)
        if 1.0 / self.frames >= self.salient_max_freq:
            msg = f"salient band [1/T, {self.salient_max_freq}) is empty for T={self.frames}"
            raise ValueError(msg)
        if any(not (0 <= a < self.joints and 0 <= b < self.joints) for a, b in self.edges):
            msg = f"skeleton edges reference joints outside [0, {self.joints})"
            raise ValueError(msg)
        return self

    @property
    def classes(self) -> int:
        """Class count ``K``."""
        return 2 * self.pairs
