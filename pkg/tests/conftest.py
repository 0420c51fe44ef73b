"""Shared fixtures: micro configurations small enough for per-test training."""
from __future__ import annotations

from typing import TYPE_CHECKING, Any

import numpy as np
import pytest

from wdce.domain.backbone import BackboneConfig, build_graph, chain_edges
from wdce.domain.data import SynthSpec, generate
from wdce.domain.model import ABLATION_PRESETS, TrainConfig, WdceModel
from wdce.domain.tensor import Rng
from wdce.lib.serialization import to_json

if TYPE_CHECKING:
    from pathlib import Path

    from wdce.domain.backbone import SkeletonGraph
    from wdce.domain.data import Dataset

MICRO_BACKBONE: dict[str, Any] = {"n_stgc": 2, "n_ssa": 1, "channels": [4, 4], "heads": 2, "tcn_kernel": 3}
MICRO_SYNTH: dict[str, Any] = {
    "pairs": 1,
    "frames": 8,
    "salient_max_freq": 0.2,
    "samples_per_class": 6,
}
MICRO_TRAIN: dict[str, Any] = {"epochs": 2, "batch_size": 4, "d_att": 4}


@pytest.fixture()
def rng() -> Rng:
    return Rng(1234)


@pytest.fixture()
def np_rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture()
def micro_graph() -> SkeletonGraph:
    return build_graph(chain_edges(5), 5)


@pytest.fixture()
def micro_backbone() -> BackboneConfig:
    return BackboneConfig(**MICRO_BACKBONE)


@pytest.fixture()
def micro_spec() -> SynthSpec:
    return SynthSpec(**MICRO_SYNTH)


@pytest.fixture()
def micro_dataset(micro_spec: SynthSpec) -> Dataset:
    return generate(micro_spec)


@pytest.fixture(params=list(ABLATION_PRESETS))
def variant(request: pytest.FixtureRequest) -> str:
    return str(request.param)


def make_model(
    variant: str = "full",
    *,
    seed: int = 0,
    frames: int = 8,
    joints: int = 5,
    classes: int = 4,
    **train: Any,
) -> WdceModel:
    """Micro model on a chain skeleton."""
    config = TrainConfig(**{**MICRO_TRAIN, **train}, seed=seed, switches=ABLATION_PRESETS[variant].model_copy())
    return WdceModel.init(config, BackboneConfig(**MICRO_BACKBONE), build_graph(chain_edges(joints), joints), frames, classes)


@pytest.fixture()
def micro_config_file(tmp_path: Path) -> Path:
    """RunConfig document sized for CLI tests."""
    path = tmp_path / "micro.json"
    path.write_bytes(to_json({"backbone": MICRO_BACKBONE, "synth": MICRO_SYNTH, "train": MICRO_TRAIN}))
    return path
