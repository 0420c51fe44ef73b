"""Haar wavelet decoupling of trajectories into low and high frequency bands."""
from __future__ import annotations

from wdce.domain.wavelet.filters import HaarFilterPair, build_haar
from wdce.domain.wavelet.transform import (
    dwt,
    dwt_array,
    from_trajectories,
    idwt,
    idwt_array,
    to_trajectories,
)

__all__ = [
    "HaarFilterPair",
    "build_haar",
    "dwt",
    "dwt_array",
    "from_trajectories",
    "idwt",
    "idwt_array",
    "to_trajectories",
]
