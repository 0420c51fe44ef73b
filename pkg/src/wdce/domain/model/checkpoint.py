"""Checkpoint container: weights, optimizer velocity, prototype bank and configuration."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from wdce.domain.backbone import BackboneConfig, build_graph
from wdce.domain.contrastive import PrototypeBank
from wdce.domain.model.network import WdceModel
from wdce.domain.model.optim import SgdState
from wdce.domain.model.schemas import TrainConfig
from wdce.lib.constants import CHECKPOINT_MAGIC
from wdce.lib.exceptions import CheckpointMismatchError, DataFormatError
from wdce.lib.log import get_logger
from wdce.lib.serialization import from_json, read_container, to_json, write_container

if TYPE_CHECKING:
    from wdce.domain.data import Dataset

__all__ = [
    "Checkpoint",
    "check_compatible",
    "checkpoint_from_bytes",
    "checkpoint_to_bytes",
    "load_checkpoint",
    "save_checkpoint",
]

logger = get_logger()

FORMAT_VERSION = 1


@dataclass(slots=True)
class Checkpoint:
    """A model with the optimizer state and run metadata it was saved with."""

    model: WdceModel
    state: SgdState
    modality: str = "joint"
    epoch: int = 0


def checkpoint_to_bytes(checkpoint: Checkpoint) -> bytes:
    """Encode a checkpoint; equal state always gives equal bytes."""
    model = checkpoint.model
    params = list(model.parameters())
    velocity = [(name, checkpoint.state.velocity[name]) for name, _ in params if name in checkpoint.state.velocity]
    arrays: list[np.ndarray] = [tensor.data for _, tensor in params] + [value for _, value in velocity]
    manifest: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "train": model.config,
        "backbone": model.backbone_config,
        "joints": model.graph.joints,
        "edges": [list(edge) for edge in model.graph.edges],
        "frames": model.frames,
        "classes": model.classes,
        "modality": checkpoint.modality,
        "epoch": checkpoint.epoch,
        "steps": checkpoint.state.steps,
        "parameters": [{"name": name, "shape": list(tensor.shape)} for name, tensor in params],
        "velocity": [name for name, _ in velocity],
        "bank": None if model.bank is None else model.bank.header(),
    }
    if model.bank is not None:
        arrays += [model.bank.feat, model.bank.att]
    return write_container(CHECKPOINT_MAGIC, to_json(manifest), arrays)


def checkpoint_from_bytes(data: bytes) -> Checkpoint:
    """Decode a checkpoint and rebuild its model.

    Raises:
        DataFormatError: On a malformed container.
        CheckpointMismatchError: If the stored tensors do not fit the stored configuration.
    """
    raw, reader = read_container(data, CHECKPOINT_MAGIC, "checkpoint")
    manifest = from_json(raw)
    if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_VERSION:
        msg = "unsupported checkpoint manifest"
        raise DataFormatError(msg, offset=reader.offset - len(raw))
    try:
        model = WdceModel.init(
            TrainConfig.model_validate(manifest["train"]),
            BackboneConfig.model_validate(manifest["backbone"]),
            build_graph([tuple(edge) for edge in manifest["edges"]], manifest["joints"]),
            manifest["frames"],
            manifest["classes"],
        )
    except (KeyError, ValueError) as exc:
        msg = f"checkpoint configuration is invalid: {exc}"
        raise CheckpointMismatchError(msg) from exc

    params = dict(model.parameters())
    stored = [entry["name"] for entry in manifest["parameters"]]
    if stored != list(params):
        msg = "checkpoint parameters do not match the model its configuration builds"
        raise CheckpointMismatchError(msg)
    for name in stored:
        start = reader.offset
        value = reader.array()
        if value.shape != params[name].shape:
            msg = f"parameter {name} has shape {value.shape}, expected {params[name].shape}"
            raise DataFormatError(msg, offset=start)
        params[name].data = value
    state = SgdState(steps=int(manifest["steps"]))
    for name in manifest["velocity"]:
        state.velocity[name] = reader.array()
    if manifest["bank"] is not None:
        if model.bank is None:
            msg = "checkpoint holds a prototype bank but the contrastive loss is off"
            raise CheckpointMismatchError(msg)
        *_, updates, flags = str(manifest["bank"]).split()
        feat, att = reader.array(), reader.array()
        model.bank = PrototypeBank(
            feat=feat,
            att=att,
            initialized=np.array([flag == "1" for flag in flags], dtype=bool),
            momentum=model.bank.momentum,
            updates=int(updates),
        )
    if not reader.exhausted:
        msg = "trailing bytes after checkpoint"
        raise DataFormatError(msg, offset=reader.offset)
    return Checkpoint(model=model, state=state, modality=str(manifest["modality"]), epoch=int(manifest["epoch"]))


def save_checkpoint(path: Path | str, checkpoint: Checkpoint) -> None:
    """Write ``checkpoint`` to ``path``."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(checkpoint_to_bytes(checkpoint))
    logger.debug("checkpoint_saved", path=str(path), steps=checkpoint.state.steps)


def load_checkpoint(path: Path | str) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    return checkpoint_from_bytes(Path(path).read_bytes())


def check_compatible(model: WdceModel, dataset: Dataset) -> None:
    """Reject a dataset whose skeleton, length or class count differs from the model's.

    Raises:
        CheckpointMismatchError: Naming the first mismatch.
    """
    expected = {"joints": model.graph.joints, "frames": model.frames, "classes": model.classes}
    found = {"joints": dataset.joints, "frames": dataset.frames, "classes": dataset.classes}
    for key, value in expected.items():
        if found[key] != value:
            msg = f"checkpoint expects {key}={value}, data has {found[key]}"
            raise CheckpointMismatchError(msg)
