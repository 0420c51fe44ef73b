"""Stratified train/test split."""
from __future__ import annotations

from typing import TYPE_CHECKING

from wdce.domain.tensor import Rng
from wdce.lib.exceptions import ConfigurationError

if TYPE_CHECKING:
    from wdce.domain.data.sequence import Dataset

__all__ = ["split"]


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split every class separately so both sides keep the class balance.

    Each class of ``n`` samples sends ``round(n * train_fraction)`` (clamped to
    ``[1, n - 1]``) to the training side; both sides keep the dataset's order.

    Raises:
        ConfigurationError: If the fraction is outside ``(0, 1)`` or a present class has fewer than two samples.
    """
    if not 0.0 < train_fraction < 1.0:
        msg = f"train fraction must be in (0, 1), got {train_fraction}"
        raise ConfigurationError(msg)
    labels = dataset.labels
    rng = Rng(seed).split("split")
    train: list[int] = []
    for k in range(dataset.classes):
        members = [i for i, label in enumerate(labels) if label == k]
        if not members:
            continue
        if len(members) < 2:  # noqa: PLR2004
            msg = f"class {k} has {len(members)} sample; a split needs at least 2"
            raise ConfigurationError(msg)
        take = min(max(round(len(members) * train_fraction), 1), len(members) - 1)
        order = rng.split(k).permutation(len(members))
        train.extend(members[i] for i in order[:take])
    chosen = set(train)
    return (
        dataset.subset(sorted(chosen)),
        dataset.subset([i for i in range(len(dataset)) if i not in chosen]),
    )
