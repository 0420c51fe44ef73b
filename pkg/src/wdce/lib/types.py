"""Library module for type definitions to be used in the application."""
from __future__ import annotations

from typing import Literal, TypeAlias

import numpy as np
import numpy.typing as npt

__all__ = ["Array", "Axes", "Modality", "Shape", "Suite"]

Array: TypeAlias = npt.NDArray[np.float64]
"""Double-precision numpy array."""
Shape: TypeAlias = tuple[int, ...]
"""Tensor extents."""
Axes: TypeAlias = int | tuple[int, ...] | None
"""Axis selection for reductions."""
Modality: TypeAlias = Literal["joint", "bone", "joint_motion", "bone_motion"]
"""Input stream derived from joint coordinates."""
Suite: TypeAlias = Literal["wavelet", "grad", "attention", "contrastive", "all"]
"""Verification suite name."""
