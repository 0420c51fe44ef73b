"""Training steps, the epoch driver and evaluation."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from wdce.domain.contrastive import check_labels, update_prototypes
from wdce.domain.model.network import forward
from wdce.domain.model.objective import compute_loss
from wdce.domain.model.optim import SgdState, clip_gradients, sgd_step
from wdce.domain.tensor import Graph, Rng, Tensor, no_grad
from wdce.lib.constants import METRICS_COLUMNS
from wdce.lib.exceptions import ShapeError, TrainingError
from wdce.lib.log import get_logger

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from wdce.domain.model.network import WdceModel
    from wdce.lib.types import Array

__all__ = [
    "EvalReport",
    "FitResult",
    "MetricsWriter",
    "StepMetrics",
    "evaluate",
    "evaluate_logits",
    "fit",
    "iterate_batches",
    "predict_logits",
    "train_step",
]

logger = get_logger()


@dataclass(frozen=True, slots=True)
class StepMetrics:
    """One row of the metrics stream."""

    epoch: int
    step: int
    loss_total: float
    loss_fuse: float
    loss_salient: float
    loss_proto: float
    acc_fuse: float

    def row(self) -> list[str]:
        """CSV cells in column order; floats use ``repr`` so reruns compare byte for byte."""
        return [repr(getattr(self, column)) for column in METRICS_COLUMNS]


class MetricsWriter:
    """Append-only metrics CSV."""

    def __init__(self, path: Path | str) -> None:
        """Create the file and write the header.

        Args:
            path: Destination CSV.
        """
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("w", newline="", encoding="utf-8") as handle:
            csv.writer(handle, lineterminator="\n").writerow(METRICS_COLUMNS)

    def write(self, metrics: StepMetrics) -> None:
        """Append one row."""
        with self.path.open("a", newline="", encoding="utf-8") as handle:
            csv.writer(handle, lineterminator="\n").writerow(metrics.row())


def iterate_batches(count: int, batch_size: int, rng: Rng) -> Iterator[np.ndarray]:
    """Yield index batches of a fresh permutation of ``range(count)``; the last one may be short."""
    order = rng.permutation(count)
    for start in range(0, count, batch_size):
        yield order[start : start + batch_size]


def _check_finite(values: dict[str, float]) -> None:
    for term in ("loss_fuse", "loss_salient", "loss_proto", "loss_total"):
        if not math.isfinite(values[term]):
            msg = f"non-finite loss {values[term]!r}"
            raise TrainingError(msg, term=term)


def train_step(
    model: WdceModel,
    batch: Array,
    labels: Sequence[int] | np.ndarray,
    state: SgdState,
    *,
    learning_rate: float,
    epoch: int = 0,
) -> StepMetrics:
    """Forward, loss, backward, one SGD update, then the prototype update.

    The loss is computed against the bank as it was before this batch; the bank is
    then updated from samples the fused head classified correctly.

    Raises:
        TrainingError: If any loss component is non-finite; parameters are left untouched.
    """
    cfg = model.config
    labels = check_labels(labels, model.classes)
    model.zero_grad()
    with Graph() as graph:
        output = forward(model, Tensor(batch))
        terms = compute_loss(model, output, labels)
    values = terms.values()
    _check_finite(values)
    if terms.total.graph is graph:
        graph.backward(terms.total)
    parameters = list(model.parameters())
    if cfg.grad_clip is not None:
        clip_gradients(parameters, cfg.grad_clip)
    sgd_step(
        state,
        parameters,
        learning_rate=learning_rate,
        momentum=cfg.momentum,
        weight_decay=cfg.weight_decay,
    )

    predictions = np.argmax(output.logits_fuse.data, axis=1)
    correct = predictions == labels
    if model.bank is not None:
        att = output.att_flat()
        update_prototypes(
            model.bank,
            output.subtle_pooled.data,
            None if att is None else att.data,
            labels,
            correct,
        )
    return StepMetrics(
        epoch=epoch,
        step=state.steps,
        acc_fuse=float(correct.mean()) if correct.size else 0.0,
        **values,
    )


def predict_logits(model: WdceModel, inputs: Array, batch_size: int = 256) -> Array:
    """Fused-head logits for every sample, untracked, in input order."""
    chunks: list[Array] = []
    with no_grad():
        for start in range(0, inputs.shape[0], batch_size):
            chunks.append(forward(model, Tensor(inputs[start : start + batch_size])).logits_fuse.data)
    return np.concatenate(chunks) if chunks else np.zeros((0, model.classes))


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Accuracy overall and per class, within-pair confusion and the confusion matrix."""

    accuracy: float
    per_class: dict[int, float]
    within_pair_confusion: float
    confusion: list[list[int]]
    samples: int

    def as_dict(self) -> dict[str, Any]:
        """JSON-ready view."""
        return {
            "accuracy": self.accuracy,
            "per_class": {str(k): v for k, v in self.per_class.items()},
            "within_pair_confusion": self.within_pair_confusion,
            "confusion": self.confusion,
            "samples": self.samples,
        }


def evaluate_logits(logits: Array, labels: Sequence[int] | np.ndarray, classes: int) -> EvalReport:
    """Score precomputed logits.

    The within-pair confusion rate is the share of samples predicted as the other
    class of their confusable pair (``k ^ 1``).
    """
    labels = check_labels(labels, classes)
    if logits.shape != (labels.size, classes):
        msg = "logits do not match labels"
        raise ShapeError(msg, logits.shape, (labels.size, classes))
    predictions = np.argmax(logits, axis=1) if labels.size else np.zeros(0, dtype=np.int64)
    confusion = np.zeros((classes, classes), dtype=np.int64)
    np.add.at(confusion, (labels, predictions), 1)
    per_class = {
        k: (float(confusion[k, k] / confusion[k].sum()) if confusion[k].sum() else 0.0) for k in range(classes)
    }
    partner = labels ^ 1
    paired = (partner < classes) & (predictions == partner)
    return EvalReport(
        accuracy=float(np.mean(predictions == labels)) if labels.size else 0.0,
        per_class=per_class,
        within_pair_confusion=float(np.mean(paired)) if labels.size else 0.0,
        confusion=confusion.tolist(),
        samples=int(labels.size),
    )


def evaluate(model: WdceModel, inputs: Array, labels: Sequence[int] | np.ndarray) -> EvalReport:
    """Score the fused head on ``inputs``."""
    return evaluate_logits(predict_logits(model, inputs, model.config.batch_size), labels, model.classes)


@dataclass(slots=True)
class FitResult:
    """Metrics history, optimizer state and the final evaluations."""

    history: list[StepMetrics] = field(default_factory=list)
    state: SgdState = field(default_factory=SgdState)
    train_report: EvalReport | None = None
    eval_report: EvalReport | None = None
    epochs_run: int = 0


def fit(
    model: WdceModel,
    inputs: Array,
    labels: Sequence[int] | np.ndarray,
    *,
    eval_inputs: Array | None = None,
    eval_labels: Sequence[int] | np.ndarray | None = None,
    metrics_path: Path | str | None = None,
    max_steps: int | None = None,
    state: SgdState | None = None,
) -> FitResult:
    """Train for ``config.epochs`` epochs (or until ``max_steps``) with milestone decay.

    Batches come from ``Rng(seed).split("batches", epoch)``, so two runs with the
    same seed see the same batches and write the same metrics.

    Args:
        model: Model to train in place.
        inputs: ``N x C_in x T x V`` training inputs.
        labels: Training labels.
        eval_inputs: Optional held-out inputs scored after training.
        eval_labels: Labels of ``eval_inputs``.
        metrics_path: Metrics CSV written step by step.
        max_steps: Stop after this many optimizer steps.
        state: Optimizer state to resume from.

    Returns:
        The run's history and reports.
    """
    cfg = model.config
    labels = check_labels(labels, model.classes)
    if inputs.shape[0] != labels.size:
        msg = "inputs and labels differ in length"
        raise ShapeError(msg, inputs.shape, labels.shape)
    writer = MetricsWriter(metrics_path) if metrics_path is not None else None
    result = FitResult(state=state or SgdState())
    rng = Rng(cfg.seed).split("batches")
    for epoch in range(cfg.epochs):
        learning_rate = cfg.learning_rate_at(epoch)
        epoch_metrics: list[StepMetrics] = []
        for indices in iterate_batches(labels.size, cfg.batch_size, rng.split(epoch)):
            metrics = train_step(
                model,
                inputs[indices],
                labels[indices],
                result.state,
                learning_rate=learning_rate,
                epoch=epoch,
            )
            epoch_metrics.append(metrics)
            result.history.append(metrics)
            if writer is not None:
                writer.write(metrics)
            if max_steps is not None and result.state.steps >= max_steps:
                break
        result.epochs_run = epoch + 1
        if epoch_metrics:
            logger.info(
                "epoch_end",
                epoch=epoch,
                lr=learning_rate,
                loss=float(np.mean([m.loss_total for m in epoch_metrics])),
                acc=float(np.mean([m.acc_fuse for m in epoch_metrics])),
            )
        if max_steps is not None and result.state.steps >= max_steps:
            break
    result.train_report = evaluate(model, inputs, labels)
    if eval_inputs is not None and eval_labels is not None:
        result.eval_report = evaluate(model, eval_inputs, eval_labels)
    return result
