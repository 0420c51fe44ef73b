"""ST-GC / SSA-Tformer backbone producing the embedding ``X_embed``."""
from __future__ import annotations

from wdce.domain.backbone.graph import SkeletonGraph, build_graph, chain_edges
from wdce.domain.backbone.layers import (
    SsaParams,
    StgcParams,
    TcnParams,
    spatial_attention,
    ssa_tformer_layer,
    st_gc_layer,
    temporal_conv,
)
from wdce.domain.backbone.network import BackboneParams, extract
from wdce.domain.backbone.schemas import BackboneConfig

__all__ = [
    "BackboneConfig",
    "BackboneParams",
    "SkeletonGraph",
    "SsaParams",
    "StgcParams",
    "TcnParams",
    "build_graph",
    "chain_edges",
    "extract",
    "spatial_attention",
    "ssa_tformer_layer",
    "st_gc_layer",
    "temporal_conv",
]
