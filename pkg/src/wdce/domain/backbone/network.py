"""Feature extractor: ST-GC layers followed by SSA-Tformer layers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from wdce.domain.backbone.layers import SsaParams, StgcParams, ssa_tformer_layer, st_gc_layer
from wdce.domain.tensor import as_tensor
from wdce.lib.exceptions import ShapeError

if TYPE_CHECKING:
    from wdce.domain.backbone.graph import SkeletonGraph
    from wdce.domain.backbone.schemas import BackboneConfig
    from wdce.domain.tensor import Rng, Tensor

__all__ = ["BackboneParams", "extract"]


@dataclass(slots=True)
class BackboneParams:
    """Weights of every backbone layer, in execution order."""

    stgc: list[StgcParams]
    ssa: list[SsaParams]

    @classmethod
    def init(cls, config: BackboneConfig, rng: Rng) -> BackboneParams:
        """Draw every layer from its own sub-stream of ``rng``."""
        widths = [config.in_channels, *config.channels]
        stgc = [
            StgcParams.init(widths[i], widths[i + 1], config.tcn_kernel, rng.split("stgc", i))
            for i in range(config.n_stgc)
        ]
        ssa = [
            SsaParams.init(config.embed_channels, config.heads, config.tcn_kernel, rng.split("ssa", i))
            for i in range(config.n_ssa)
        ]
        return cls(stgc=stgc, ssa=ssa)


def extract(x: Tensor, graph: SkeletonGraph, params: BackboneParams) -> Tensor:
    """Embed ``N x C_in x T x V`` skeletons into ``N x C x T x V`` features.

    No layer strides in time, so ``T`` reaches the wavelet stage intact.

    Raises:
        ShapeError: If ``T`` is odd or the input does not match the first layer.
    """
    x = as_tensor(x)
    if x.ndim != 4 or x.shape[2] % 2:  # noqa: PLR2004
        msg = "backbone input must be N x C x T x V with even T"
        raise ShapeError(msg, x.shape)
    for layer in params.stgc:
        x = st_gc_layer(x, graph, layer)
    for layer in params.ssa:
        x = ssa_tformer_layer(x, layer)
    return x
