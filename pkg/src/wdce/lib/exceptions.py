"""Exception types.

Every error raised on purpose by the package derives from :class:`WdceError`.
The CLI translates the two top-level families into exit codes.
"""
from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

__all__ = (
    "WdceError",
    "ApplicationClientError",
    "CheckpointMismatchError",
    "ConfigurationError",
    "DataFormatError",
    "GradientCheckError",
    "GraphError",
    "LabelError",
    "PrototypeError",
    "ShapeError",
    "TrainingError",
    "VerificationError",
)


class WdceError(Exception):
    """Base exception type for the lib's custom exception types."""


class ApplicationClientError(WdceError):
    """Base exception type for errors caused by caller input."""


class ShapeError(ApplicationClientError, ValueError):
    """Operand shapes do not conform."""

    def __init__(self, message: str, *shapes: Sequence[int]) -> None:
        """Shape Error.

        Args:
            message: what went wrong.
            *shapes: the offending shapes, appended to the message.
        """
        self.shapes = tuple(tuple(shape) for shape in shapes)
        if self.shapes:
            message = f"{message}: " + " vs ".join(str(shape) for shape in self.shapes)
        super().__init__(message)


class ConfigurationError(ApplicationClientError, ValueError):
    """A configuration document or flag is invalid."""


class LabelError(ApplicationClientError, ValueError):
    """A class label is outside ``[0, K)``."""


class DataFormatError(ApplicationClientError, ValueError):
    """A file could not be parsed."""

    def __init__(self, message: str, *, offset: int | None = None, line: int | None = None) -> None:
        """Data Format Error.

        Args:
            message: what went wrong.
            offset: byte offset of the problem in a binary file.
            line: 1-based line number of the problem in a text file.
        """
        self.offset = offset
        self.line = line
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        if line is not None:
            message = f"{message} (at line {line})"
        super().__init__(message)


class CheckpointMismatchError(ApplicationClientError):
    """A checkpoint does not match the data or configuration it is used with."""


class GraphError(WdceError, RuntimeError):
    """Backward pass requested on a graph that cannot provide it."""


class GradientCheckError(WdceError, ArithmeticError):
    """A finite-difference evaluation in a gradient check produced a non-finite value."""

    def __init__(self, message: str, *, tensor_index: int, coordinate: tuple[int, ...]) -> None:
        """Gradient Check Error.

        Args:
            message: what went wrong.
            tensor_index: position of the perturbed tensor in the point list.
            coordinate: index of the perturbed coordinate inside that tensor.
        """
        self.tensor_index = tensor_index
        self.coordinate = coordinate
        super().__init__(f"{message} at tensor {tensor_index}, coordinate {coordinate}")


class PrototypeError(WdceError, ValueError):
    """An uninitialized or degenerate prototype reached the contrastive loss."""


class TrainingError(WdceError, ArithmeticError):
    """Training produced a non-finite value."""

    def __init__(self, message: str, *, term: str) -> None:
        """Training Error.

        Args:
            message: what went wrong.
            term: name of the loss component that went non-finite.
        """
        self.term = term
        super().__init__(f"{message} (term: {term})")


class VerificationError(WdceError):
    """A verification property failed."""

    def __init__(self, failed: Sequence[str]) -> None:
        """Verification Error.

        Args:
            failed: names of the failed properties.
        """
        self.failed = tuple(failed)
        super().__init__("failed properties: " + ", ".join(self.failed))
