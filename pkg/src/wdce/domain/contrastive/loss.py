"""Cosine similarity and the prototype contrastive loss."""
from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from wdce.domain.contrastive.bank import PrototypeBank, check_labels
from wdce.domain.tensor import Tensor, as_tensor, ops
from wdce.lib.exceptions import ConfigurationError, PrototypeError, ShapeError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from wdce.domain.contrastive.schemas import ContrastiveConfig
    from wdce.lib.types import Array

__all__ = ["contrastive_term", "cosine_similarity", "prototype_loss"]

_TINY = 1e-300


def cosine_similarity(a: Sequence[float] | Array, b: Sequence[float] | Array) -> float:
    """Return ``a.b / (|a| |b|)``.

    Raises:
        PrototypeError: If either vector has zero norm.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        msg = "cosine similarity of vectors with different lengths"
        raise ShapeError(msg, a.shape, b.shape)
    norm_a, norm_b = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        msg = "cosine similarity of a zero-norm vector (uninitialized prototype?)"
        raise PrototypeError(msg)
    return float(np.clip(a @ b / (norm_a * norm_b), -1.0, 1.0))


def _unit_rows(protos: Array) -> Array:
    norms = np.linalg.norm(protos, axis=1, keepdims=True)
    if not np.all(np.isfinite(protos)) or np.any(norms == 0.0):
        msg = "prototype with zero norm or non-finite entries reached the loss"
        raise PrototypeError(msg)
    return protos / norms


def contrastive_term(samples: Tensor, protos: Array, labels: np.ndarray, tau: float) -> Tensor:
    """Mean of ``-log softmax_k(sim(x, P_k) / tau)[label]`` over the batch.

    Prototypes are constants. A zero sample vector has similarity 0 with every prototype.

    Args:
        samples: ``N x D`` vectors.
        protos: ``K x D`` prototypes (all initialized).
        labels: Class per sample.
        tau: Temperature.
    """
    samples = as_tensor(samples)
    if samples.ndim != 2 or samples.shape[1] != protos.shape[1] or samples.shape[0] != labels.size:  # noqa: PLR2004
        msg = "contrastive term: samples do not match prototypes"
        raise ShapeError(msg, samples.shape, protos.shape)
    norms = ops.add(ops.l2_norm(samples, axis=1, keepdims=True), _TINY)
    sims = ops.matmul(ops.div(samples, norms), _unit_rows(protos).T)
    log_probs = ops.log_softmax(ops.div(sims, tau), axis=1)
    picked = log_probs[np.arange(labels.size), labels]
    return ops.neg(ops.mean(picked))


def prototype_loss(
    bank: PrototypeBank,
    subtle_feats: Tensor,
    att_maps: Tensor | None,
    labels: Sequence[int] | np.ndarray,
    cfg: ContrastiveConfig,
) -> Tensor:
    """Weighted feature and attention contrastive terms against the bank.

    Returns a zero constant while any prototype is uninitialized, unless ``cfg.strict``.
    The attention term is skipped when ``att_maps`` is ``None`` or ``beta`` is zero.

    Args:
        bank: Prototype bank, read only.
        subtle_feats: Pooled subtle features ``N x D_feat``.
        att_maps: Flattened attention maps ``N x D_att``, or ``None``.
        labels: Class per sample.
        cfg: Weights and temperature.

    Returns:
        Scalar loss.
    """
    if cfg.tau <= 0:
        msg = f"contrastive temperature must be positive, got {cfg.tau}"
        raise ConfigurationError(msg)
    labels = check_labels(labels, bank.classes)
    if not bank.ready:
        if cfg.strict:
            missing = [int(k) for k in np.flatnonzero(~bank.initialized)]
            msg = f"prototypes for classes {missing} are not initialized"
            raise PrototypeError(msg)
        return Tensor(0.0)
    loss = ops.mul(contrastive_term(subtle_feats, bank.feat, labels, cfg.tau), cfg.alpha)
    if att_maps is not None and cfg.beta > 0:
        if not bank.att_dim:
            msg = "attention maps given but the bank tracks no attention prototypes"
            raise PrototypeError(msg)
        att_term = contrastive_term(att_maps, bank.att, labels, cfg.tau)
        loss = ops.add(loss, ops.mul(att_term, cfg.beta))
    return loss
