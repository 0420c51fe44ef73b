"""WDCE constants."""
from __future__ import annotations

from typing import Final

__all__ = [
    "CHECKPOINT_MAGIC",
    "DATASET_MAGIC",
    "BANK_MAGIC",
    "DEFAULT_SKELETON_EDGES",
    "DEFAULT_SEED",
    "METRICS_COLUMNS",
    "MODALITIES",
]

CHECKPOINT_MAGIC: Final = b"WDCK"
"""Leading bytes of a checkpoint container."""
DATASET_MAGIC: Final = b"WDCD"
"""Leading bytes of a dataset container."""
BANK_MAGIC: Final = b"WDCB"
"""Leading bytes of a prototype bank container."""
DEFAULT_SEED: Final = 0
"""Seed used when no flag, file or environment variable sets one."""
DEFAULT_SKELETON_EDGES: Final[tuple[tuple[int, int], ...]] = ((0, 1), (0, 2), (0, 3), (3, 4), (4, 5), (5, 6))
"""Seven-joint toy skeleton: joint 0 is the hub of a star (1, 2, 3) and 3 starts the chain 3-4-5-6."""
METRICS_COLUMNS: Final = ("epoch", "step", "loss_total", "loss_fuse", "loss_salient", "loss_proto", "acc_fuse")
"""Column order of the metrics CSV."""
MODALITIES: Final = ("joint", "bone", "joint_motion", "bone_motion")
"""Input streams fused at score level."""
