"""Project CLI."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import TYPE_CHECKING, Any

import click
import numpy as np
import structlog
from rich import get_console
from rich.markup import escape
from rich.table import Table

from utils import dataclass_as_dict_shallow, parse_int_list
from wdce.domain.backbone import build_graph
from wdce.domain.data import (
    Dataset,
    TrajectoryRecord,
    discriminability_ratio,
    generate,
    import_csv,
    load_dataset,
    read_trajectory_csv,
    save_dataset,
    split,
    write_trajectory_csv,
)
from wdce.domain.model import (
    ABLATION_PRESETS,
    Checkpoint,
    WdceModel,
    check_compatible,
    ensemble_logits,
    evaluate_logits,
    fit,
    forward,
    load_checkpoint,
    modality_inputs,
    predict_logits,
    rank_variants,
    run_ablation,
    save_checkpoint,
    write_summary,
)
from wdce.domain.run import RunConfig, resolve_run_config
from wdce.domain.tensor import Tensor, dump, no_grad
from wdce.domain.verify import SUITES, run_suites
from wdce.domain.wavelet import dwt_array, idwt_array
from wdce.lib import log, settings
from wdce.lib.constants import MODALITIES
from wdce.lib.exceptions import ApplicationClientError, ConfigurationError, DataFormatError, VerificationError, WdceError
from wdce.lib.serialization import to_json

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from wdce.domain.model import EvalReport

__all__ = ["wdce"]

console = get_console()
"""Pre-configured CLI Console."""

logger = log.get_logger()

EXIT_FAILURE = 1
EXIT_USAGE = 2


class WdceGroup(click.Group):
    """Command group that turns package errors into exit codes.

    Caller mistakes (bad flags, configs, files, mismatched checkpoints) exit with 2,
    failed verification properties and every other package error with 1.
    """

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except ApplicationClientError as exc:
            console.print(f"[bold red]error:[/] {escape(str(exc))}", highlight=False)
            ctx.exit(EXIT_USAGE)
        except VerificationError as exc:
            console.print(f"[bold red]verification failed:[/] {escape(str(exc))}", highlight=False)
            ctx.exit(EXIT_FAILURE)
        except WdceError as exc:
            console.print(f"[bold red]{type(exc).__name__}:[/] {escape(str(exc))}", highlight=False)
            ctx.exit(EXIT_FAILURE)


@click.group(cls=WdceGroup, help="Wavelet-decoupled contrastive skeleton action recognition.")
@click.version_option(settings.project.VERSION, prog_name=settings.project.NAME)
def wdce() -> None:
    """Configure logging and the numpy error policy for every command."""
    log.configure()
    np.seterr(all=settings.log.NUMPY_ERRORS)


_config_options = (
    click.option(
        "--config",
        "config_file",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="RunConfig JSON document (full or partial).",
    ),
    click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override one field, e.g. train.learning_rate=0.05."),
    click.option("--seed", type=int, default=None, help="Seed for training and generation."),
)


def config_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Add ``--config``, ``--set`` and ``--seed`` to a command."""
    for option in reversed(_config_options):
        func = option(func)
    return func


def _resolve(
    config_file: Path | None,
    overrides: Sequence[str],
    seed: int | None,
    *,
    synth_file: Path | None = None,
) -> RunConfig:
    config = resolve_run_config(config_file, overrides, seed=seed, synth_file=synth_file)
    logger.info("config_resolved", config=config.model_dump(mode="json"))
    return config


def _load_data(path: Path) -> Dataset:
    return import_csv(path) if path.suffix.lower() == ".csv" else load_dataset(path)


def _write_json(path: Path, value: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(to_json(value) + b"\n")


def _report_table(title: str, report: EvalReport) -> Table:
    table = Table(title=title)
    table.add_column("class", justify="right")
    table.add_column("accuracy", justify="right")
    for k, accuracy in report.per_class.items():
        table.add_row(str(k), f"{accuracy:.4f}")
    table.add_section()
    table.add_row("overall", f"{report.accuracy:.4f}")
    table.add_row("within-pair confusion", f"{report.within_pair_confusion:.4f}")
    return table


@wdce.command(name="config", help="Print the resolved run configuration as JSON.")
@click.option("--print-defaults", is_flag=True, default=False, help="Ignore every source and print built-in defaults.")
@config_options
def config_cmd(print_defaults: bool, config_file: Path | None, overrides: tuple[str, ...], seed: int | None) -> None:
    """Print the configuration a command would run with."""
    config = RunConfig() if print_defaults else _resolve(config_file, overrides, seed)
    click.echo(to_json(config).decode())


@wdce.command(name="gen", help="Generate a synthetic confusable-pairs dataset.")
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="SynthSpec JSON.")
@click.option("--out", "out", type=click.Path(dir_okay=False, path_type=Path), required=True, help="Dataset file.")
@config_options
def gen(spec_file: Path | None, out: Path, config_file: Path | None, overrides: tuple[str, ...], seed: int | None) -> None:
    """Write the dataset and report per-class counts and the band discriminability ratio."""
    config = _resolve(config_file, overrides, seed, synth_file=spec_file)
    dataset = generate(config.synth)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(out, dataset)
    ratio = discriminability_ratio(dataset)

    table = Table(title=f"{out.name}: {len(dataset)} samples")
    table.add_column("class", justify="right")
    table.add_column("samples", justify="right")
    for label, count in dataset.class_counts().items():
        table.add_row(str(label), str(count))
    console.print(table)
    click.echo(f"samples={len(dataset)}")
    click.echo(f"discriminability_ratio={ratio!r}")


@wdce.command(name="train", help="Train a model and write metrics, checkpoint and report.")
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True, help="Run directory.")
@click.option("--modality", type=click.Choice(MODALITIES), default=None, help="Input stream; overrides the config.")
@click.option("--max-steps", type=click.IntRange(min=1), default=None, help="Stop after this many optimizer steps.")
@config_options
def train(
    data: Path,
    out: Path,
    modality: str | None,
    max_steps: int | None,
    config_file: Path | None,
    overrides: tuple[str, ...],
    seed: int | None,
) -> None:
    """Train on the train split and score both splits."""
    config = _resolve(config_file, overrides, seed)
    modality = modality or config.modality
    dataset = _load_data(data)
    graph = build_graph(dataset.edges, dataset.joints)
    train_set, test_set = split(dataset, config.split_fraction, config.train.seed)
    with structlog.contextvars.bound_contextvars(run_id=out.name, seed=config.train.seed, modality=modality):
        model = WdceModel.init(config.train, config.backbone, graph, dataset.frames, dataset.classes)
        result = fit(
            model,
            modality_inputs(train_set.coordinates(), graph, modality),
            train_set.labels,
            eval_inputs=modality_inputs(test_set.coordinates(), graph, modality),
            eval_labels=test_set.labels,
            metrics_path=out / "metrics.csv",
            max_steps=max_steps,
        )
        save_checkpoint(
            out / "model.ckpt",
            Checkpoint(model=model, state=result.state, modality=modality, epoch=result.epochs_run),
        )
    report: dict[str, Any] = {
        "modality": modality,
        "epochs": result.epochs_run,
        "steps": result.state.steps,
        "train": None if result.train_report is None else result.train_report.as_dict(),
        "test": None if result.eval_report is None else result.eval_report.as_dict(),
    }
    _write_json(out / "report.json", report)
    if result.eval_report is not None:
        console.print(_report_table("test split", result.eval_report))
    click.echo(f"checkpoint={out / 'model.ckpt'}")


@wdce.command(name="eval", help="Score one checkpoint, or fuse several by averaging their logits.")
@click.option(
    "--ckpt",
    "checkpoints",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    multiple=True,
    required=True,
    help="Checkpoint; repeat for score-level fusion across modalities.",
)
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--subset", type=click.Choice(["test", "train", "all"]), default="test", show_default=True)
@click.option(
    "--fraction",
    type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
    default=RunConfig.model_fields["split_fraction"].default,
    show_default=True,
    help="Training share used to rebuild the split.",
)
@click.option("--seed", type=int, default=None, help="Split seed; defaults to the first checkpoint's training seed.")
def eval_cmd(checkpoints: tuple[Path, ...], data: Path, subset: str, fraction: float, seed: int | None) -> None:
    """Print overall and per-class accuracy and the within-pair confusion rate."""
    dataset = _load_data(data)
    loaded = [load_checkpoint(path) for path in checkpoints]
    for checkpoint in loaded:
        check_compatible(checkpoint.model, dataset)
    split_seed = seed if seed is not None else loaded[0].model.config.seed
    if subset == "all":
        target = dataset
    else:
        train_set, test_set = split(dataset, fraction, split_seed)
        target = train_set if subset == "train" else test_set
    logits = ensemble_logits(
        [
            predict_logits(
                checkpoint.model,
                modality_inputs(target.coordinates(), checkpoint.model.graph, checkpoint.modality),
                checkpoint.model.config.batch_size,
            )
            for checkpoint in loaded
        ],
    )
    report = evaluate_logits(logits, target.labels, dataset.classes)
    modalities = "+".join(checkpoint.modality for checkpoint in loaded)
    console.print(_report_table(f"{subset} split ({modalities})", report))
    click.echo(f"accuracy={report.accuracy!r}")
    click.echo(f"within_pair_confusion={report.within_pair_confusion!r}")


@wdce.command(name="ablate", help="Run the component ablation across seeds and rank the variants.")
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--seeds", default="0,1,2", show_default=True, help="Comma-separated seeds.")
@click.option("--variants", default=None, help=f"Comma-separated subset of {','.join(ABLATION_PRESETS)}.")
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=settings.runtime.ABLATE_WORKERS,
    show_default=True,
    help="Replicates trained concurrently.",
)
@config_options
def ablate(
    data: Path,
    out: Path,
    seeds: str,
    variants: str | None,
    workers: int,
    config_file: Path | None,
    overrides: tuple[str, ...],
    seed: int | None,
) -> None:
    """Write per-run results and the ranking to ``ablation.csv``."""
    config = _resolve(config_file, overrides, seed)
    try:
        seed_list = parse_int_list(seeds)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    names = None if variants is None else [name.strip() for name in variants.split(",") if name.strip()]
    dataset = _load_data(data)
    runs = run_ablation(
        dataset,
        seed_list,
        config.train,
        config.backbone,
        split_fraction=config.split_fraction,
        variants=names,
        out_dir=out,
        workers=workers,
        modality=config.modality,
    )
    rows = rank_variants(runs)
    write_summary(out / "ablation.csv", runs, rows)

    table = Table(title=f"ablation over seeds {','.join(map(str, seed_list))}")
    for column in ("rank", "variant", "mean_accuracy", "std_accuracy", "mean_confusion", "runs"):
        table.add_column(column, justify="left" if column == "variant" else "right")
    for row in rows:
        cells = dataclass_as_dict_shallow(row)
        table.add_row(*(f"{value:.4f}" if isinstance(value, float) else str(value) for value in cells.values()))
    console.print(table)
    click.echo(f"summary={out / 'ablation.csv'}")


@wdce.command(name="verify", help="Run the property suites; exits 1 naming any failed property.")
@click.option("--suite", type=click.Choice([*SUITES, "all"]), default="all", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def verify(suite: str, seed: int) -> None:
    """Print the maximum measured error per suite."""
    reports = run_suites(suite, seed)
    table = Table(title="verification")
    table.add_column("suite")
    table.add_column("properties", justify="right")
    table.add_column("max error", justify="right")
    table.add_column("status")
    for report in reports:
        status = "[green]pass[/]" if report.passed else "[red]fail[/]"
        table.add_row(report.suite, str(len(report.results)), f"{report.max_error:.3e}", status)
    console.print(table)
    for report in reports:
        click.echo(f"{report.suite}.max_error={report.max_error!r}")
    failed = [name for report in reports for name in report.failed]
    if failed:
        raise VerificationError(failed)


def _time_last(values: np.ndarray) -> np.ndarray:
    return np.moveaxis(values, 1, -1)


def _time_second(values: np.ndarray) -> np.ndarray:
    return np.moveaxis(values, -1, 1)


@wdce.command(name="dwt", help="Split trajectories into low and high Haar bands.")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
def dwt_cmd(in_path: Path, out: Path) -> None:
    """Write ``low.csv`` and ``high.csv`` with ``T/2`` frames each."""
    records = read_trajectory_csv(in_path)
    low, high = [], []
    for record in records:
        bands = dwt_array(_time_last(record.values))
        low.append(TrajectoryRecord(record.sample_id, record.label, _time_second(bands[0])))
        high.append(TrajectoryRecord(record.sample_id, record.label, _time_second(bands[1])))
    write_trajectory_csv(out / "low.csv", low)
    write_trajectory_csv(out / "high.csv", high)
    click.echo(f"low={out / 'low.csv'}")
    click.echo(f"high={out / 'high.csv'}")


@wdce.command(name="idwt", help="Rebuild trajectories from low.csv and high.csv.")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def idwt_cmd(in_dir: Path, out: Path) -> None:
    """Inverse of ``dwt``."""
    low, high = read_trajectory_csv(in_dir / "low.csv"), read_trajectory_csv(in_dir / "high.csv")
    if [(r.sample_id, r.label) for r in low] != [(r.sample_id, r.label) for r in high]:
        msg = "low.csv and high.csv hold different samples"
        raise DataFormatError(msg)
    rebuilt = [
        TrajectoryRecord(
            a.sample_id,
            a.label,
            _time_second(idwt_array(_time_last(a.values), _time_last(b.values))),
        )
        for a, b in zip(low, high, strict=True)
    ]
    write_trajectory_csv(out, rebuilt)
    click.echo(f"out={out}")


@wdce.command(name="dump", help="Dump pooled features and attention maps for external visualization.")
@click.option("--ckpt", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
def dump_cmd(ckpt: Path, data: Path, out: Path) -> None:
    """Write ``fused``, ``salient`` and ``subtle`` feature tensors, ``att`` maps and ``index.csv``."""
    checkpoint = load_checkpoint(ckpt)
    model = checkpoint.model
    dataset = _load_data(data)
    check_compatible(model, dataset)
    inputs = modality_inputs(dataset.coordinates(), model.graph, checkpoint.modality)

    features: dict[str, list[np.ndarray]] = {"fused": [], "salient": [], "subtle": [], "att": []}
    with no_grad():
        for start in range(0, len(dataset), model.config.batch_size):
            output = forward(model, Tensor(inputs[start : start + model.config.batch_size]))
            features["fused"].append(output.fuse_pooled.data)
            features["salient"].append(output.salient_pooled.data)
            features["subtle"].append(output.subtle_pooled.data)
            att = output.att_flat()
            if att is not None:
                features["att"].append(att.data)

    out.mkdir(parents=True, exist_ok=True)
    for name, chunks in features.items():
        if not chunks:
            logger.info("dump_skipped", tensor=name, reason="trajectory attention is off")
            continue
        matrix = np.concatenate(chunks)
        dump.write_tensor(out / f"{name}.wdct", Tensor(matrix))
        click.echo(f"{name}={matrix.shape[0]}x{matrix.shape[1]}")
    with (out / "index.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("row", "sample_id", "label"))
        for row, sequence in enumerate(dataset):
            writer.writerow((row, sequence.sample_id, sequence.label))
