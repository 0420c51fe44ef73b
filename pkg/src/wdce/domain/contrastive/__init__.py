"""Prototype bank and the prototype contrastive loss."""
from __future__ import annotations

from wdce.domain.contrastive.bank import (
    PrototypeBank,
    bank_from_bytes,
    bank_to_bytes,
    check_labels,
    load_bank,
    save_bank,
    update_prototypes,
)
from wdce.domain.contrastive.loss import contrastive_term, cosine_similarity, prototype_loss
from wdce.domain.contrastive.schemas import ContrastiveConfig

__all__ = [
    "ContrastiveConfig",
    "PrototypeBank",
    "bank_from_bytes",
    "bank_to_bytes",
    "check_labels",
    "contrastive_term",
    "cosine_similarity",
    "load_bank",
    "prototype_loss",
    "save_bank",
    "update_prototypes",
]
