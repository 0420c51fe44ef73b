"""Tensor dump files: ``b"WDCT"``, u32 rank, u64 extents, f64 payload (little-endian)."""
from __future__ import annotations

from pathlib import Path

from wdce.domain.tensor.engine import Tensor
from wdce.lib.exceptions import DataFormatError
from wdce.lib.serialization import ByteReader, dump_array

__all__ = ["from_bytes", "read_tensor", "read_tensors", "to_bytes", "write_tensor", "write_tensors"]


def to_bytes(tensor: Tensor) -> bytes:
    """Encode one tensor."""
    return dump_array(tensor.data)


def from_bytes(data: bytes) -> Tensor:
    """Decode exactly one tensor.

    Raises:
        DataFormatError: On bad magic, truncation or trailing bytes.
    """
    reader = ByteReader(data)
    tensor = Tensor(reader.array())
    if not reader.exhausted:
        msg = "trailing bytes after tensor dump"
        raise DataFormatError(msg, offset=reader.offset)
    return tensor


def write_tensor(path: Path | str, tensor: Tensor) -> None:
    """Write one tensor dump to ``path``."""
    Path(path).write_bytes(to_bytes(tensor))


def read_tensor(path: Path | str) -> Tensor:
    """Read one tensor dump from ``path``."""
    return from_bytes(Path(path).read_bytes())


def write_tensors(path: Path | str, tensors: list[Tensor]) -> None:
    """Write several dumps back to back."""
    Path(path).write_bytes(b"".join(to_bytes(tensor) for tensor in tensors))


def read_tensors(path: Path | str) -> list[Tensor]:
    """Read back-to-back dumps until the file ends."""
    reader = ByteReader(Path(path).read_bytes())
    tensors: list[Tensor] = []
    while not reader.exhausted:
        tensors.append(Tensor(reader.array()))
    return tensors
