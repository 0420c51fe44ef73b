"""Component ablation: every method row over several seeds."""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import TYPE_CHECKING

import anyio
import anyio.to_thread
import numpy as np
import structlog

from wdce.domain.backbone import build_graph
from wdce.domain.data import split
from wdce.domain.model.checkpoint import Checkpoint, save_checkpoint
from wdce.domain.model.modalities import modality_inputs
from wdce.domain.model.network import WdceModel
from wdce.domain.model.schemas import ABLATION_PRESETS
from wdce.domain.model.training import fit
from wdce.lib.exceptions import ConfigurationError, TrainingError
from wdce.lib.log import get_logger

if TYPE_CHECKING:
    from collections.abc import Sequence

    from wdce.domain.backbone import BackboneConfig
    from wdce.domain.data import Dataset
    from wdce.domain.model.schemas import TrainConfig

__all__ = ["AblationRow", "AblationRun", "rank_variants", "run_ablation", "run_variant", "write_summary"]

logger = get_logger()


@dataclass(frozen=True, slots=True)
class AblationRun:
    """Outcome of one (variant, seed) replicate."""

    variant: str
    seed: int
    accuracy: float
    within_pair_confusion: float
    train_accuracy: float


@dataclass(frozen=True, slots=True)
class AblationRow:
    """Mean and spread of one variant over its seeds."""

    rank: int
    variant: str
    mean_accuracy: float
    std_accuracy: float
    mean_confusion: float
    runs: int


def run_variant(
    dataset: Dataset,
    variant: str,
    seed: int,
    train_config: TrainConfig,
    backbone_config: BackboneConfig,
    *,
    split_fraction: float,
    modality: str = "joint",
    out_dir: Path | None = None,
) -> AblationRun:
    """Train and score one variant with one seed; writes metrics and a checkpoint under ``out_dir``."""
    if variant not in ABLATION_PRESETS:
        msg = f"unknown ablation variant {variant!r}; expected one of {', '.join(ABLATION_PRESETS)}"
        raise ConfigurationError(msg)
    config = train_config.model_copy(update={"seed": seed, "switches": ABLATION_PRESETS[variant].model_copy()})
    graph = build_graph(dataset.edges, dataset.joints)
    train, test = split(dataset, split_fraction, seed)
    with structlog.contextvars.bound_contextvars(variant=variant, seed=seed):
        model = WdceModel.init(config, backbone_config, graph, dataset.frames, dataset.classes)
        result = fit(
            model,
            modality_inputs(train.coordinates(), graph, modality),
            train.labels,
            eval_inputs=modality_inputs(test.coordinates(), graph, modality),
            eval_labels=test.labels,
            metrics_path=None if out_dir is None else out_dir / "metrics.csv",
        )
        if out_dir is not None:
            save_checkpoint(
                out_dir / "model.ckpt",
                Checkpoint(model=model, state=result.state, modality=modality, epoch=result.epochs_run),
            )
        report, train_report = result.eval_report, result.train_report
        if report is None or train_report is None:
            msg = "run finished without an evaluation"
            raise TrainingError(msg, term="evaluation")
        logger.info("ablation_run", accuracy=report.accuracy, confusion=report.within_pair_confusion)
    return AblationRun(
        variant=variant,
        seed=seed,
        accuracy=report.accuracy,
        within_pair_confusion=report.within_pair_confusion,
        train_accuracy=train_report.accuracy,
    )


def run_ablation(
    dataset: Dataset,
    seeds: Sequence[int],
    train_config: TrainConfig,
    backbone_config: BackboneConfig,
    *,
    split_fraction: float = 0.8,
    variants: Sequence[str] | None = None,
    out_dir: Path | str | None = None,
    workers: int = 1,
    modality: str = "joint",
) -> list[AblationRun]:
    """Run every variant for every seed.

    Replicates run in worker threads (at most ``workers`` at once); each owns its
    model and output directory ``<out_dir>/<variant>/seed-<seed>``. Results come
    back in (variant, seed) order regardless of completion order.
    """
    names = list(variants or ABLATION_PRESETS)
    unknown = [name for name in names if name not in ABLATION_PRESETS]
    if unknown or not seeds:
        msg = f"unknown ablation variants {unknown}" if unknown else "ablation needs at least one seed"
        raise ConfigurationError(msg)
    if workers < 1:
        msg = f"workers must be >= 1, got {workers}"
        raise ConfigurationError(msg)
    root = None if out_dir is None else Path(out_dir)
    jobs = [(name, int(seed)) for name in names for seed in seeds]
    results: dict[tuple[str, int], AblationRun] = {}

    async def _run_all() -> None:
        limiter = anyio.CapacityLimiter(workers)

        async def _one(name: str, seed: int) -> None:
            target = None if root is None else root / name / f"seed-{seed}"
            job = partial(
                run_variant,
                dataset,
                name,
                seed,
                train_config,
                backbone_config,
                split_fraction=split_fraction,
                modality=modality,
                out_dir=target,
            )
            results[(name, seed)] = await anyio.to_thread.run_sync(job, limiter=limiter)

        async with anyio.create_task_group() as group:
            for name, seed in jobs:
                group.start_soon(_one, name, seed)

    anyio.run(_run_all)
    return [results[job] for job in jobs]


def rank_variants(runs: Sequence[AblationRun]) -> list[AblationRow]:
    """Aggregate runs per variant and rank by mean test accuracy (ties keep preset order)."""
    order = list(dict.fromkeys(run.variant for run in runs))
    rows = []
    for variant in order:
        accuracies = np.array([run.accuracy for run in runs if run.variant == variant])
        confusion = np.array([run.within_pair_confusion for run in runs if run.variant == variant])
        rows.append((variant, float(accuracies.mean()), float(accuracies.std()), float(confusion.mean()), accuracies.size))
    ranked = sorted(rows, key=lambda row: -row[1])
    return [
        AblationRow(rank=i + 1, variant=v, mean_accuracy=m, std_accuracy=s, mean_confusion=c, runs=n)
        for i, (v, m, s, c, n) in enumerate(ranked)
    ]


def write_summary(path: Path | str, runs: Sequence[AblationRun], rows: Sequence[AblationRow]) -> None:
    """Write per-run results followed by the ranking as two CSV blocks."""
    lines = ["variant,seed,accuracy,within_pair_confusion,train_accuracy"]
    lines += [
        f"{run.variant},{run.seed},{run.accuracy!r},{run.within_pair_confusion!r},{run.train_accuracy!r}" for run in runs
    ]
    lines += ["", "rank,variant,mean_accuracy,std_accuracy,mean_confusion,runs"]
    lines += [
        f"{row.rank},{row.variant},{row.mean_accuracy!r},{row.std_accuracy!r},{row.mean_confusion!r},{row.runs}"
        for row in rows
    ]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
