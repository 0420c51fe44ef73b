"""Seeded, splittable random streams.

Streams are addressed by a root seed plus a path of keys, so any component can
derive an independent generator (``rng.split("noise", sample_id)``) without
threading state through the call chain. Values depend only on the seed and the
path, never on call order elsewhere in the program.
"""
from __future__ import annotations

import zlib
from typing import TYPE_CHECKING

import numpy as np

from wdce.lib.exceptions import ConfigurationError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from wdce.lib.types import Array

__all__ = ["Rng"]

_MAX_SEED = 2**64


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        msg = f"stream keys must be non-negative, got {part}"
        raise ConfigurationError(msg)
    return int(part)


class Rng:
    """PCG64 generator seeded through :class:`numpy.random.SeedSequence` spawn keys."""

    __slots__ = ("_generator", "path", "seed")

    def __init__(self, seed: int, path: Sequence[int | str] = ()) -> None:
        """Initialize the stream.

        Args:
            seed: 64-bit unsigned root seed.
            path: Keys naming the sub-stream; strings are hashed with CRC-32.
        """
        if not 0 <= seed < _MAX_SEED:
            msg = f"seed must be in [0, 2**64), got {seed}"
            raise ConfigurationError(msg)
        self.seed = int(seed)
        self.path = tuple(_key(part) for part in path)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def split(self, *keys: int | str) -> Rng:
        """Derive an independent child stream.

        Args:
            *keys: Keys appended to this stream's path.

        Returns:
            The child stream.
        """
        return Rng(self.seed, self.path + tuple(_key(key) for key in keys))

    def uniform(self, low: float, high: float, shape: Sequence[int] = ()) -> Array:
        """Draw uniform values in ``[low, high)``."""
        return self._generator.uniform(low, high, size=tuple(shape))

    def normal(self, shape: Sequence[int] = (), scale: float = 1.0) -> Array:
        """Draw zero-mean Gaussian values."""
        return self._generator.normal(0.0, scale, size=tuple(shape))

    def integers(self, low: int, high: int, shape: Sequence[int] = ()) -> np.ndarray:
        """Draw integers in ``[low, high)``."""
        return self._generator.integers(low, high, size=tuple(shape))

    def permutation(self, n: int) -> np.ndarray:
        """Return a random permutation of ``range(n)``."""
        return self._generator.permutation(n)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, path={self.path})"
