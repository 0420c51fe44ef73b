"""Orthonormal Haar filter matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from wdce.lib.exceptions import ShapeError

if TYPE_CHECKING:
    from wdce.lib.types import Array

__all__ = ["HaarFilterPair", "build_haar"]


@dataclass(frozen=True, slots=True)
class HaarFilterPair:
    """Low-pass ``L`` and high-pass ``H`` analysis matrices for a length-``T`` signal.

    Both are ``T x T/2``; column ``j`` touches rows ``2j`` and ``2j+1`` only, so a
    row vector ``x`` maps to ``x @ L`` (pairwise scaled sums) and ``x @ H``
    (pairwise scaled differences). The pair is orthonormal: ``L.T @ L = I``,
    ``H.T @ H = I``, ``L.T @ H = 0`` and ``L @ L.T + H @ H.T = I``.
    """

    frames: int
    low: Array
    high: Array

    @property
    def half(self) -> int:
        """Length of each band."""
        return self.frames // 2


@lru_cache(maxsize=32)
def build_haar(frames: int) -> HaarFilterPair:
    """Build the Haar filter pair for an even frame count.

    Args:
        frames: Signal length ``T``; must be even and at least 2.

    Returns:
        The read-only filter pair.

    Raises:
        ShapeError: If ``frames`` is odd or not positive.
    """
    if frames < 2 or frames % 2:  # noqa: PLR2004
        msg = f"Haar DWT needs an even frame count T >= 2, got T={frames}"
        raise ShapeError(msg)
    half = frames // 2
    scale = 1.0 / math.sqrt(2.0)
    low = np.zeros((frames, half))
    high = np.zeros((frames, half))
    cols = np.arange(half)
    low[2 * cols, cols] = scale
    low[2 * cols + 1, cols] = scale
    high[2 * cols, cols] = scale
    high[2 * cols + 1, cols] = -scale
    low.setflags(write=False)
    high.setflags(write=False)
    return HaarFilterPair(frames=frames, low=low, high=high)
