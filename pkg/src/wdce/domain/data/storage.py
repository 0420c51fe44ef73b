"""Dataset files and CSV import."""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from wdce.domain.backbone import chain_edges
from wdce.domain.data.sequence import Dataset, SkeletonSequence
from wdce.lib.constants import DATASET_MAGIC
from wdce.lib.exceptions import DataFormatError, WdceError
from wdce.lib.log import get_logger
from wdce.lib.serialization import read_container, write_container

if TYPE_CHECKING:
    from collections.abc import Iterable

    from wdce.lib.types import Array

__all__ = [
    "CSV_COLUMNS",
    "TrajectoryRecord",
    "dataset_from_bytes",
    "dataset_to_bytes",
    "import_csv",
    "load_dataset",
    "read_trajectory_csv",
    "save_dataset",
    "write_trajectory_csv",
]

logger = get_logger()

CSV_COLUMNS = ("sample_id", "label", "joint", "frame", "x", "y", "z")
"""Header of trajectory CSV files."""


def _header(dataset: Dataset) -> str:
    edges = ",".join(f"{a}-{b}" for a, b in dataset.edges) or "-"
    return f"joints={dataset.joints} frames={dataset.frames} classes={dataset.classes} edges={edges}"


def dataset_to_bytes(dataset: Dataset) -> bytes:
    """Encode the dataset container.

    The manifest is a header line followed by one ``sample_id<TAB>label`` line per
    sample; the ``V x T x 3`` coordinate dumps follow in the same order.
    """
    lines = [_header(dataset), *(f"{s.sample_id}\t{s.label}" for s in dataset.sequences)]
    manifest = ("\n".join(lines) + "\n").encode("ascii")
    return write_container(DATASET_MAGIC, manifest, (s.joints for s in dataset.sequences))


def _parse_header(line: str, offset: int) -> tuple[int, int, int, tuple[tuple[int, int], ...]]:
    try:
        fields = dict(part.split("=", 1) for part in line.split())
        edges: tuple[tuple[int, int], ...] = ()
        if fields["edges"] != "-":
            edges = tuple(
                (int(a), int(b)) for a, b in (pair.split("-") for pair in fields["edges"].split(","))
            )
        return int(fields["joints"]), int(fields["frames"]), int(fields["classes"]), edges
    except (KeyError, ValueError) as exc:
        msg = f"malformed dataset header {line!r}"
        raise DataFormatError(msg, offset=offset) from exc


def dataset_from_bytes(data: bytes) -> Dataset:
    """Decode a dataset container.

    Raises:
        DataFormatError: On bad magic, malformed manifest lines or truncated dumps.
    """
    manifest, reader = read_container(data, DATASET_MAGIC, "dataset")
    offset = reader.offset - len(manifest)
    lines = manifest.decode("ascii", errors="replace").splitlines()
    if not lines:
        msg = "dataset manifest is empty"
        raise DataFormatError(msg, offset=offset)
    joints, frames, classes, edges = _parse_header(lines[0], offset)
    dataset = Dataset(joints=joints, frames=frames, classes=classes, edges=edges)
    line_offset = offset + len(lines[0]) + 1
    for line in lines[1:]:
        try:
            sample_id, label = (int(part) for part in line.split("\t"))
        except ValueError as exc:
            msg = f"malformed manifest line {line!r}"
            raise DataFormatError(msg, offset=line_offset) from exc
        start = reader.offset
        joints_array = reader.array()
        try:
            dataset.append(SkeletonSequence(joints=joints_array, label=label, sample_id=sample_id))
        except WdceError as exc:
            raise DataFormatError(str(exc), offset=start) from exc
        line_offset += len(line) + 1
    if not reader.exhausted:
        msg = "trailing bytes after the last sample"
        raise DataFormatError(msg, offset=reader.offset)
    return dataset


def save_dataset(path: Path | str, dataset: Dataset) -> None:
    """Write ``dataset`` to ``path``."""
    Path(path).write_bytes(dataset_to_bytes(dataset))
    logger.debug("dataset_saved", path=str(path), samples=len(dataset))


def load_dataset(path: Path | str) -> Dataset:
    """Read a dataset written by :func:`save_dataset`."""
    dataset = dataset_from_bytes(Path(path).read_bytes())
    logger.debug("dataset_loaded", path=str(path), samples=len(dataset))
    return dataset


@dataclass(frozen=True, slots=True)
class TrajectoryRecord:
    """One sample read from a trajectory CSV: ``V x T x 3`` values, any ``T``."""

    sample_id: int
    label: int
    values: Array


def read_trajectory_csv(path: Path | str) -> list[TrajectoryRecord]:
    """Parse long-format rows ``sample_id,label,joint,frame,x,y,z`` into dense records.

    Every ``(sample_id, joint, frame)`` triple must appear exactly once and all
    samples must share one joint count and one frame count.

    Raises:
        DataFormatError: With the 1-based line number of the offending row.
    """
    cells: dict[int, dict[tuple[int, int], tuple[float, ...]]] = defaultdict(dict)
    labels: dict[int, int] = {}
    first_line: dict[int, int] = {}
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(column.strip() for column in header) != CSV_COLUMNS:
            msg = f"expected header {','.join(CSV_COLUMNS)}"
            raise DataFormatError(msg, line=1)
        for record in reader:
            line = reader.line_num
            if not record:
                continue
            if len(record) != len(CSV_COLUMNS):
                msg = f"expected {len(CSV_COLUMNS)} fields, got {len(record)}"
                raise DataFormatError(msg, line=line)
            try:
                sample_id, label, joint, frame = (int(value) for value in record[:4])
                point = tuple(float(value) for value in record[4:])
            except ValueError as exc:
                msg = f"unparsable row {','.join(record)!r}"
                raise DataFormatError(msg, line=line) from exc
            if min(sample_id, label, joint, frame) < 0 or not all(np.isfinite(point)):
                msg = "negative index or non-finite coordinate"
                raise DataFormatError(msg, line=line)
            if labels.setdefault(sample_id, label) != label:
                msg = f"sample {sample_id} changes label"
                raise DataFormatError(msg, line=line)
            if (joint, frame) in cells[sample_id]:
                msg = f"duplicate joint {joint} frame {frame} for sample {sample_id}"
                raise DataFormatError(msg, line=line)
            first_line.setdefault(sample_id, line)
            cells[sample_id][(joint, frame)] = point

    if not cells:
        msg = "no trajectory rows"
        raise DataFormatError(msg, line=1)
    joints = 1 + max(j for sample in cells.values() for j, _ in sample)
    frames = 1 + max(t for sample in cells.values() for _, t in sample)
    records = []
    for sample_id in sorted(cells):
        sample = cells[sample_id]
        if len(sample) != joints * frames:
            msg = f"sample {sample_id} has {len(sample)} rows, expected {joints} joints x {frames} frames"
            raise DataFormatError(msg, line=first_line[sample_id])
        values = np.zeros((joints, frames, 3))
        for (joint, frame), point in sample.items():
            values[joint, frame] = point
        records.append(TrajectoryRecord(sample_id=sample_id, label=labels[sample_id], values=values))
    return records


def write_trajectory_csv(path: Path | str, records: Iterable[TrajectoryRecord]) -> None:
    """Write records in the long format read by :func:`read_trajectory_csv`; floats use ``repr``."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            joints, frames, _ = record.values.shape
            for joint in range(joints):
                for frame in range(frames):
                    x, y, z = (repr(float(v)) for v in record.values[joint, frame])
                    writer.writerow([record.sample_id, record.label, joint, frame, x, y, z])


def import_csv(
    path: Path | str,
    *,
    edges: tuple[tuple[int, int], ...] | None = None,
    classes: int | None = None,
) -> Dataset:
    """Build a dataset from a trajectory CSV.

    Args:
        path: CSV with columns ``sample_id,label,joint,frame,x,y,z``.
        edges: Skeleton edges; a chain over the joints when omitted.
        classes: Class count; ``max(label) + 1`` when omitted.

    Raises:
        DataFormatError: On malformed rows, or if a sample is not a valid sequence (odd ``T``).
    """
    records = read_trajectory_csv(path)
    joints, frames, _ = records[0].values.shape
    dataset = Dataset(
        joints=joints,
        frames=frames,
        classes=classes if classes is not None else 1 + max(record.label for record in records),
        edges=edges if edges is not None else chain_edges(joints),
    )
    for record in records:
        try:
            dataset.append(SkeletonSequence(joints=record.values, label=record.label, sample_id=record.sample_id))
        except WdceError as exc:
            raise DataFormatError(str(exc)) from exc
    logger.info("csv_imported", path=str(path), samples=len(dataset), joints=joints, frames=frames)
    return dataset
