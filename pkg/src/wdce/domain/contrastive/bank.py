"""Per-class feature and attention prototypes."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from wdce.lib.constants import BANK_MAGIC
from wdce.lib.exceptions import ConfigurationError, DataFormatError, LabelError, ShapeError
from wdce.lib.log import get_logger
from wdce.lib.serialization import read_container, write_container

if TYPE_CHECKING:
    from collections.abc import Sequence

    from wdce.lib.types import Array

__all__ = [
    "PrototypeBank",
    "bank_from_bytes",
    "bank_to_bytes",
    "check_labels",
    "load_bank",
    "save_bank",
    "update_prototypes",
]

logger = get_logger()


@dataclass(slots=True)
class PrototypeBank:
    """Running class anchors for the contrastive loss.

    ``att`` has zero columns when the model runs without trajectory attention; the
    attention prototypes then simply do not exist.
    """

    feat: Array
    att: Array
    initialized: np.ndarray
    momentum: float = 0.9
    updates: int = field(default=0)

    @classmethod
    def empty(cls, classes: int, feat_dim: int, att_dim: int = 0, momentum: float = 0.9) -> PrototypeBank:
        """Bank with every prototype uninitialized.

        Args:
            classes: Class count ``K``.
            feat_dim: Width of pooled subtle features.
            att_dim: Width of flattened attention maps (``C*V``), or 0.
            momentum: EMA momentum in ``(0, 1)``.
        """
        if classes < 1 or feat_dim < 1 or att_dim < 0:
            msg = f"bad prototype bank extents K={classes}, D_feat={feat_dim}, D_att={att_dim}"
            raise ConfigurationError(msg)
        if not 0.0 < momentum < 1.0:
            msg = f"prototype momentum must be in (0, 1), got {momentum}"
            raise ConfigurationError(msg)
        return cls(
            feat=np.zeros((classes, feat_dim)),
            att=np.zeros((classes, att_dim)),
            initialized=np.zeros(classes, dtype=bool),
            momentum=momentum,
        )

    @property
    def classes(self) -> int:
        """Class count ``K``."""
        return self.feat.shape[0]

    @property
    def feat_dim(self) -> int:
        """Feature prototype width."""
        return self.feat.shape[1]

    @property
    def att_dim(self) -> int:
        """Attention prototype width, 0 when attention prototypes are not tracked."""
        return self.att.shape[1]

    @property
    def ready(self) -> bool:
        """Whether every class has a prototype the loss may read."""
        return bool(self.initialized.all())

    def copy(self) -> PrototypeBank:
        """Deep copy."""
        return PrototypeBank(
            feat=self.feat.copy(),
            att=self.att.copy(),
            initialized=self.initialized.copy(),
            momentum=self.momentum,
            updates=self.updates,
        )

    def header(self) -> str:
        """One-line ``K D_feat m updates flags`` description used by bank dumps."""
        flags = "".join("1" if flag else "0" for flag in self.initialized)
        return f"{self.classes} {self.feat_dim} {self.momentum!r} {self.updates} {flags}"


def check_labels(labels: Sequence[int] | np.ndarray, classes: int) -> np.ndarray:
    """Return ``labels`` as an int array, rejecting values outside ``[0, classes)``."""
    values = np.asarray(labels, dtype=np.int64).reshape(-1)
    bad = values[(values < 0) | (values >= classes)]
    if bad.size:
        msg = f"label {int(bad[0])} outside [0, {classes})"
        raise LabelError(msg)
    return values


def update_prototypes(
    bank: PrototypeBank,
    subtle_feats: Array,
    att_maps: Array | None,
    labels: Sequence[int] | np.ndarray,
    correct_mask: Sequence[bool] | np.ndarray,
) -> PrototypeBank:
    """Fold the batch's correctly classified samples into the bank, in place.

    Each class with at least one correct sample moves its prototypes to the class
    mean on first sight, then by ``m * P + (1 - m) * mean``.

    Args:
        bank: Bank to update.
        subtle_feats: Pooled subtle features ``N x D_feat``.
        att_maps: Flattened attention maps ``N x D_att``; required iff the bank tracks attention.
        labels: Class per sample.
        correct_mask: Whether each sample was classified correctly.

    Returns:
        ``bank``.
    """
    labels = check_labels(labels, bank.classes)
    mask = np.asarray(correct_mask, dtype=bool).reshape(-1)
    feats = np.asarray(subtle_feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != bank.feat_dim or feats.shape[0] != labels.size or mask.size != labels.size:  # noqa: PLR2004
        msg = "prototype update: features, labels and mask are not aligned"
        raise ShapeError(msg, feats.shape, labels.shape, mask.shape)
    atts: Array | None = None
    if bank.att_dim:
        if att_maps is None:
            msg = "prototype update: bank tracks attention prototypes but no maps were given"
            raise ShapeError(msg, (labels.size, bank.att_dim))
        atts = np.asarray(att_maps, dtype=np.float64)
        if atts.shape != (labels.size, bank.att_dim):
            msg = "prototype update: attention maps do not match bank"
            raise ShapeError(msg, atts.shape, (labels.size, bank.att_dim))

    m = bank.momentum
    touched = 0
    for k in np.unique(labels[mask]):
        members = mask & (labels == k)
        feat_mean = feats[members].mean(axis=0)
        att_mean = atts[members].mean(axis=0) if atts is not None else None
        if bank.initialized[k]:
            bank.feat[k] = m * bank.feat[k] + (1.0 - m) * feat_mean
            if att_mean is not None:
                bank.att[k] = m * bank.att[k] + (1.0 - m) * att_mean
        else:
            bank.feat[k] = feat_mean
            if att_mean is not None:
                bank.att[k] = att_mean
            bank.initialized[k] = True
        touched += 1
    if touched:
        bank.updates += 1
    return bank


def save_bank(path: Path | str, bank: PrototypeBank) -> None:
    """Write the bank: header line, feature prototypes, attention prototypes."""
    Path(path).write_bytes(bank_to_bytes(bank))


def bank_to_bytes(bank: PrototypeBank) -> bytes:
    """Encode the bank container."""
    return write_container(BANK_MAGIC, bank.header().encode("ascii"), [bank.feat, bank.att])


def bank_from_bytes(data: bytes) -> PrototypeBank:
    """Decode a bank container.

    Raises:
        DataFormatError: On malformed headers, truncation or inconsistent extents.
    """
    manifest, reader = read_container(data, BANK_MAGIC, "prototype bank")
    header_offset = reader.offset - len(manifest)
    fields = manifest.decode("ascii", errors="replace").split()
    try:
        classes, feat_dim, momentum, updates, flags = (
            int(fields[0]),
            int(fields[1]),
            float(fields[2]),
            int(fields[3]),
            fields[4],
        )
    except (IndexError, ValueError) as exc:
        msg = f"malformed prototype bank header {manifest!r}"
        raise DataFormatError(msg, offset=header_offset) from exc
    if len(fields) != 5 or updates < 0 or len(flags) != classes or set(flags) - {"0", "1"}:  # noqa: PLR2004
        msg = f"malformed prototype bank header {manifest!r}"
        raise DataFormatError(msg, offset=header_offset)
    start = reader.offset
    feat = reader.array()
    att = reader.array()
    if feat.shape != (classes, feat_dim) or att.ndim != 2 or att.shape[0] != classes:  # noqa: PLR2004
        msg = f"prototype arrays {feat.shape}, {att.shape} do not match header"
        raise DataFormatError(msg, offset=start)
    if not reader.exhausted:
        msg = "trailing bytes after prototype bank"
        raise DataFormatError(msg, offset=reader.offset)
    return PrototypeBank(
        feat=feat,
        att=att,
        initialized=np.array([flag == "1" for flag in flags], dtype=bool),
        momentum=momentum,
        updates=updates,
    )


def load_bank(path: Path | str) -> PrototypeBank:
    """Read a bank written by :func:`save_bank`."""
    bank = bank_from_bytes(Path(path).read_bytes())
    logger.debug("prototype_bank_loaded", path=str(path), classes=bank.classes, ready=bank.ready)
    return bank
