"""Synthetic confusable skeleton data, dataset files and splits."""
from __future__ import annotations

from wdce.domain.data.schemas import SynthSpec
from wdce.domain.data.sequence import Dataset, SkeletonSequence
from wdce.domain.data.split import split
from wdce.domain.data.storage import (
    CSV_COLUMNS,
    TrajectoryRecord,
    dataset_from_bytes,
    dataset_to_bytes,
    import_csv,
    load_dataset,
    read_trajectory_csv,
    save_dataset,
    write_trajectory_csv,
)
from wdce.domain.data.synth import (
    SinusoidBank,
    discriminability_ratio,
    generate,
    rest_pose,
    salient_bank,
    subtle_bank,
)

__all__ = [
    "CSV_COLUMNS",
    "Dataset",
    "SinusoidBank",
    "SkeletonSequence",
    "SynthSpec",
    "TrajectoryRecord",
    "dataset_from_bytes",
    "dataset_to_bytes",
    "discriminability_ratio",
    "generate",
    "import_csv",
    "load_dataset",
    "read_trajectory_csv",
    "rest_pose",
    "salient_bank",
    "save_dataset",
    "split",
    "subtle_bank",
    "write_trajectory_csv",
]
