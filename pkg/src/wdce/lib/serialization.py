"""Serialization Helpers.

JSON goes through :doc:`msgspec <msgspec:index>`; tensors use the fixed little-endian
dump layout shared by checkpoints, datasets and prototype banks.
"""
from __future__ import annotations

import struct
from typing import TYPE_CHECKING, Any, Final

import msgspec
import numpy as np
from pydantic import BaseModel

from wdce.lib.exceptions import DataFormatError

if TYPE_CHECKING:
    from collections.abc import Iterable

__all__ = [
    "TENSOR_MAGIC",
    "ByteReader",
    "dump_array",
    "from_json",
    "read_container",
    "to_json",
    "write_container",
]

TENSOR_MAGIC: Final = b"WDCT"
"""Leading bytes of a single tensor dump."""
_U32: Final = struct.Struct("<I")
_U64: Final = struct.Struct("<Q")
_F64: Final = np.dtype("<f8")


def _default(value: Any) -> Any:
    """Default encoder for msgspec.

    Args:
        value: The value to encode

    Returns:
        The encodable value
    """
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    try:
        val = str(value)
    except Exception as exc:  # noqa: BLE001
        raise TypeError from exc
    else:
        return val


_msgspec_json_encoder = msgspec.json.Encoder(enc_hook=_default, order="sorted")
_msgspec_json_decoder = msgspec.json.Decoder()


def to_json(value: Any) -> bytes:
    """Encode json with the optimized :doc:`msgspec <msgspec:index>` package.

    Keys are sorted so equal values always encode to equal bytes.

    Args:
        value: The value to encode

    Returns:
        bytes: The encoded value
    """
    return _msgspec_json_encoder.encode(value)


def from_json(value: bytes | str) -> Any:
    """Decode to an object with the optimized :doc:`msgspec <msgspec:index>` package.

    Args:
        value: The value to decode

    Returns:
        Any: The decoded value
    """
    try:
        return _msgspec_json_decoder.decode(value)
    except msgspec.DecodeError as exc:
        msg = f"malformed JSON: {exc}"
        raise DataFormatError(msg) from exc


def dump_array(array: np.ndarray) -> bytes:
    """Encode one array in the tensor dump layout.

    Layout: ``b"WDCT"``, u32 rank, rank x u64 extents, f64 payload in row-major order.

    Args:
        array: Values to encode; converted to little-endian float64.

    Returns:
        The encoded bytes.
    """
    values = np.require(array, dtype=_F64, requirements=["C"])
    header = TENSOR_MAGIC + _U32.pack(values.ndim) + b"".join(_U64.pack(extent) for extent in values.shape)
    return header + values.tobytes(order="C")


class ByteReader:
    """Cursor over a byte buffer that reports offsets on malformed input."""

    def __init__(self, data: bytes) -> None:
        """Initialize the reader.

        Args:
            data: The buffer to read.
        """
        self.data = data
        self.offset = 0

    @property
    def exhausted(self) -> bool:
        """Whether every byte has been consumed."""
        return self.offset >= len(self.data)

    def take(self, size: int, what: str) -> bytes:
        """Consume ``size`` bytes.

        Args:
            size: Number of bytes.
            what: Name of the field, used in the error message.

        Returns:
            The consumed bytes.

        Raises:
            DataFormatError: If fewer than ``size`` bytes remain.
        """
        end = self.offset + size
        if end > len(self.data):
            msg = f"truncated {what}: need {size} bytes, {len(self.data) - self.offset} left"
            raise DataFormatError(msg, offset=self.offset)
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk

    def expect(self, magic: bytes, what: str) -> None:
        """Consume and check magic bytes.

        Args:
            magic: Expected bytes.
            what: Name of the structure, used in the error message.

        Raises:
            DataFormatError: On mismatch.
        """
        start = self.offset
        found = self.take(len(magic), f"{what} magic")
        if found != magic:
            msg = f"bad {what} magic {found!r}, expected {magic!r}"
            raise DataFormatError(msg, offset=start)

    def u32(self, what: str) -> int:
        """Consume a little-endian u32."""
        return int(_U32.unpack(self.take(_U32.size, what))[0])

    def u64(self, what: str) -> int:
        """Consume a little-endian u64."""
        return int(_U64.unpack(self.take(_U64.size, what))[0])

    def array(self) -> np.ndarray:
        """Consume one tensor dump.

        Returns:
            The decoded float64 array.
        """
        self.expect(TENSOR_MAGIC, "tensor")
        rank = self.u32("tensor rank")
        shape = tuple(self.u64("tensor extent") for _ in range(rank))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        payload = self.take(count * _F64.itemsize, "tensor payload")
        return np.frombuffer(payload, dtype=_F64).reshape(shape).astype(np.float64)


def write_container(magic: bytes, manifest: bytes, arrays: Iterable[np.ndarray]) -> bytes:
    """Encode a container: magic, u64 manifest length, manifest, then tensor dumps.

    Args:
        magic: Four bytes naming the container kind.
        manifest: Header bytes describing the payload.
        arrays: Tensors in manifest order.

    Returns:
        The encoded container.
    """
    return magic + _U64.pack(len(manifest)) + manifest + b"".join(dump_array(array) for array in arrays)


def read_container(data: bytes, magic: bytes, what: str) -> tuple[bytes, ByteReader]:
    """Decode a container header.

    Args:
        data: Whole file contents.
        magic: Expected container magic.
        what: Container kind, used in error messages.

    Returns:
        The manifest bytes and a reader positioned at the first tensor dump.
    """
    reader = ByteReader(data)
    reader.expect(magic, what)
    length = reader.u64(f"{what} manifest length")
    manifest = reader.take(length, f"{what} manifest")
    return manifest, reader
