"""WDCE-Net model: forward pass, objective, training, checkpoints and ablations."""
from __future__ import annotations

from wdce.domain.model.ablation import AblationRow, AblationRun, rank_variants, run_ablation, run_variant, write_summary
from wdce.domain.model.checkpoint import (
    Checkpoint,
    check_compatible,
    checkpoint_from_bytes,
    checkpoint_to_bytes,
    load_checkpoint,
    save_checkpoint,
)
from wdce.domain.model.modalities import bones, derive_modalities, ensemble_logits, modality_inputs, motion
from wdce.domain.model.network import (
    ForwardOutput,
    Linear,
    WdceModel,
    channel_split_control,
    forward,
    split_channels,
)
from wdce.domain.model.objective import LossTerms, compute_loss, cross_entropy
from wdce.domain.model.optim import SgdState, clip_gradients, sgd_step
from wdce.domain.model.schemas import ABLATION_PRESETS, AblationSwitches, TrainConfig
from wdce.domain.model.training import (
    EvalReport,
    FitResult,
    MetricsWriter,
    StepMetrics,
    evaluate,
    evaluate_logits,
    fit,
    iterate_batches,
    predict_logits,
    train_step,
)

__all__ = [
    "ABLATION_PRESETS",
    "AblationRow",
    "AblationRun",
    "AblationSwitches",
    "Checkpoint",
    "EvalReport",
    "FitResult",
    "ForwardOutput",
    "Linear",
    "LossTerms",
    "MetricsWriter",
    "SgdState",
    "StepMetrics",
    "TrainConfig",
    "WdceModel",
    "bones",
    "channel_split_control",
    "check_compatible",
    "checkpoint_from_bytes",
    "checkpoint_to_bytes",
    "clip_gradients",
    "compute_loss",
    "cross_entropy",
    "derive_modalities",
    "ensemble_logits",
    "evaluate",
    "evaluate_logits",
    "fit",
    "forward",
    "iterate_batches",
    "load_checkpoint",
    "modality_inputs",
    "motion",
    "predict_logits",
    "rank_variants",
    "run_ablation",
    "run_variant",
    "save_checkpoint",
    "sgd_step",
    "split_channels",
    "train_step",
    "write_summary",
]
