"""Composite objective: two cross-entropy heads plus the prototype contrastive term."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from wdce.domain.contrastive import check_labels, prototype_loss
from wdce.domain.tensor import Tensor, as_tensor, ops

if TYPE_CHECKING:
    from collections.abc import Sequence

    from wdce.domain.model.network import ForwardOutput, WdceModel

__all__ = ["LossTerms", "compute_loss", "cross_entropy"]


def cross_entropy(logits: Tensor, labels: Sequence[int] | np.ndarray) -> Tensor:
    """Mean softmax cross-entropy of ``N x K`` logits.

    Raises:
        LabelError: If a label is outside ``[0, K)``.
    """
    logits = as_tensor(logits)
    labels = check_labels(labels, logits.shape[-1])
    picked = ops.log_softmax(logits, axis=1)[np.arange(labels.size), labels]
    return ops.neg(ops.mean(picked))


@dataclass(frozen=True, slots=True)
class LossTerms:
    """Total loss and its unweighted components."""

    total: Tensor
    fuse: Tensor
    salient: Tensor
    proto: Tensor

    def values(self) -> dict[str, float]:
        """Plain floats keyed ``loss_total``, ``loss_fuse``, ``loss_salient``, ``loss_proto``."""
        return {
            "loss_total": self.total.item(),
            "loss_fuse": self.fuse.item(),
            "loss_salient": self.salient.item(),
            "loss_proto": self.proto.item(),
        }


def compute_loss(model: WdceModel, output: ForwardOutput, labels: Sequence[int] | np.ndarray) -> LossTerms:
    """``lambda_fuse * L_fuse + lambda_salient * L_salient + lambda_proto * L_proto``.

    The contrastive term reads the bank but never writes it; it is zero while the
    bank is incomplete or when the contrastive loss is switched off.
    """
    cfg = model.config
    labels = check_labels(labels, model.classes)
    fuse = cross_entropy(output.logits_fuse, labels)
    salient = cross_entropy(output.logits_salient, labels)
    if cfg.switches.use_pcl and model.bank is not None:
        proto = prototype_loss(model.bank, output.subtle_pooled, output.att_flat(), labels, cfg.contrastive)
    else:
        proto = Tensor(0.0)
    total = ops.add(
        ops.add(ops.mul(fuse, cfg.lambda_fuse), ops.mul(salient, cfg.lambda_salient)),
        ops.mul(proto, cfg.lambda_proto),
    )
    return LossTerms(total=total, fuse=fuse, salient=salient, proto=proto)
