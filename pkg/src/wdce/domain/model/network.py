"""WDCE-Net assembly: backbone, wavelet decoupling, trajectory attention, two heads."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from wdce.domain.attention import (
    AttentionMap,
    DecouplingAttentionParams,
    TrajectoryAttentionParams,
    decoupling_attention,
    recalibrate,
    trajectory_attention,
)
from wdce.domain.backbone import BackboneConfig, BackboneParams, SkeletonGraph, extract
from wdce.domain.contrastive import PrototypeBank
from wdce.domain.tensor import Rng, Tensor, as_tensor, named_parameters, ops, uniform_param, zeros_param
from wdce.domain.wavelet import dwt, from_trajectories, to_trajectories
from wdce.lib.exceptions import ShapeError

if TYPE_CHECKING:
    from collections.abc import Iterator

    from wdce.domain.model.schemas import TrainConfig

__all__ = ["ForwardOutput", "Linear", "WdceModel", "channel_split_control", "forward", "split_channels"]


@dataclass(slots=True)
class Linear:
    """Fully connected head ``D -> K``."""

    weight: Tensor
    bias: Tensor

    @classmethod
    def init(cls, in_features: int, out_features: int, rng: Rng) -> Linear:
        """Uniform ``+-1/sqrt(D)`` weights, zero bias."""
        return cls(
            weight=uniform_param(rng, (in_features, out_features), in_features),
            bias=zeros_param((out_features,)),
        )

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)


@dataclass(slots=True)
class WdceModel:
    """All trainable state plus the prototype bank and the configuration that shaped it.

    Optional blocks are ``None`` when their switch is off; the bank exists only
    when the contrastive loss is enabled.
    """

    config: TrainConfig = field(metadata={"parameter": False})
    backbone_config: BackboneConfig = field(metadata={"parameter": False})
    graph: SkeletonGraph = field(metadata={"parameter": False})
    frames: int = field(metadata={"parameter": False})
    classes: int = field(metadata={"parameter": False})
    backbone: BackboneParams
    head_fuse: Linear
    head_salient: Linear
    decoupling: DecouplingAttentionParams | None = None
    trajectory: TrajectoryAttentionParams | None = None
    bank: PrototypeBank | None = field(default=None, metadata={"parameter": False})

    @classmethod
    def init(
        cls,
        config: TrainConfig,
        backbone_config: BackboneConfig,
        graph: SkeletonGraph,
        frames: int,
        classes: int,
    ) -> WdceModel:
        """Build a model with weights drawn from ``Rng(config.seed)``.

        Args:
            config: Training configuration (switches, attention widths, contrastive settings).
            backbone_config: Backbone shape.
            graph: Skeleton the backbone aggregates over.
            frames: Frame count ``T`` (even).
            classes: Class count ``K``.
        """
        switches = config.switches
        if frames % 2 or frames < 2:  # noqa: PLR2004
            msg = "the model needs an even frame count"
            raise ShapeError(msg, (frames,))
        rng = Rng(config.seed).split("params")
        channels = backbone_config.embed_channels
        if switches.use_channel_split:
            if channels % 2:
                msg = "channel split needs an even embedding width"
                raise ShapeError(msg, (channels,))
            width = channels // 2
        else:
            width = channels
        decoupling = (
            DecouplingAttentionParams.init(channels, frames, rng.split("decoupling"), kernel=config.da_kernel)
            if switches.use_da
            else None
        )
        trajectory = (
            TrajectoryAttentionParams.init(width, graph.joints, rng.split("trajectory"), latent=config.d_att)
            if switches.use_ta
            else None
        )
        bank = (
            PrototypeBank.empty(
                classes,
                width,
                width * graph.joints if switches.use_ta else 0,
                momentum=config.contrastive.momentum,
            )
            if switches.use_pcl
            else None
        )
        return cls(
            config=config,
            backbone_config=backbone_config,
            graph=graph,
            frames=frames,
            classes=classes,
            backbone=BackboneParams.init(backbone_config, rng.split("backbone")),
            head_fuse=Linear.init(width, classes, rng.split("head_fuse")),
            head_salient=Linear.init(width, classes, rng.split("head_salient")),
            decoupling=decoupling,
            trajectory=trajectory,
            bank=bank,
        )

    def parameters(self) -> Iterator[tuple[str, Tensor]]:
        """Every trainable tensor with its dotted name, in a fixed order."""
        return named_parameters(self)

    def zero_grad(self) -> None:
        """Clear every parameter gradient."""
        for _, tensor in self.parameters():
            tensor.zero_grad()


@dataclass(frozen=True, slots=True)
class ForwardOutput:
    """Logits of both heads and the pooled features the losses and dumps read."""

    logits_fuse: Tensor
    logits_salient: Tensor
    fuse_pooled: Tensor
    salient_pooled: Tensor
    subtle_pooled: Tensor
    att: AttentionMap | None

    def att_flat(self) -> Tensor | None:
        """Attention map as ``N x (C*V)`` rows (channel-major), tracked."""
        if self.att is None:
            return None
        n = self.att.values.shape[0]
        return ops.reshape(self.att.values, (n, -1))


def split_channels(x_embed: Tensor) -> tuple[Tensor, Tensor]:
    """First and last halves of the channel axis.

    Raises:
        ShapeError: If the channel count is odd.
    """
    x_embed = as_tensor(x_embed)
    if x_embed.ndim != 4 or x_embed.shape[1] % 2:  # noqa: PLR2004
        msg = "channel split needs N x C x T x V features with even C"
        raise ShapeError(msg, x_embed.shape)
    half = x_embed.shape[1] // 2
    return x_embed[:, :half], x_embed[:, half:]


def _pool_pairs(x: Tensor) -> Tensor:
    n, c, t, v = x.shape
    return ops.mean(ops.reshape(x, (n, c, t // 2, 2, v)), axis=3)


def channel_split_control(x_embed: Tensor) -> tuple[Tensor, Tensor]:
    """Split channels in half instead of frequency bands, pooling time pairwise to ``T/2``.

    Returns:
        ``(salient, subtle)``, each ``N x C/2 x T/2 x V``.
    """
    first, second = split_channels(x_embed)
    if first.shape[2] % 2:
        msg = "channel split needs an even frame count"
        raise ShapeError(msg, x_embed.shape)
    return _pool_pairs(first), _pool_pairs(second)


def forward(model: WdceModel, batch: Tensor) -> ForwardOutput:
    """Run the network on ``N x C_in x T x V`` skeletons.

    Without decoupling (the baseline), both heads read the pooled embedding and
    the subtle features are the embedding itself.
    """
    switches = model.config.switches
    batch = as_tensor(batch)
    if batch.ndim != 4 or batch.shape[2] != model.frames or batch.shape[3] != model.graph.joints:  # noqa: PLR2004
        msg = "batch does not match the model's (T, V)"
        raise ShapeError(msg, batch.shape, (model.frames, model.graph.joints))
    x_embed = extract(batch, model.graph, model.backbone)
    _, channels, _, joints = x_embed.shape

    att: AttentionMap | None = None
    if switches.use_dwt:
        low, high = dwt(to_trajectories(x_embed))
        if model.decoupling is not None:
            salient, subtle = decoupling_attention(x_embed, low, high, model.decoupling)
        else:
            salient, subtle = from_trajectories(low, channels, joints), from_trajectories(high, channels, joints)
    elif switches.use_channel_split:
        salient, subtle = channel_split_control(x_embed)
        if model.decoupling is not None:
            salient, subtle = recalibrate(x_embed, salient, subtle, model.decoupling)
    else:
        salient = subtle = x_embed

    if switches.decoupled:
        if model.trajectory is not None:
            subtle, att = trajectory_attention(subtle, model.trajectory)
        fused = ops.add(salient, subtle)
    else:
        fused = x_embed

    fuse_pooled = ops.mean(fused, axis=(2, 3))
    salient_pooled = ops.mean(salient, axis=(2, 3))
    subtle_pooled = ops.mean(subtle, axis=(2, 3))
    return ForwardOutput(
        logits_fuse=model.head_fuse(fuse_pooled),
        logits_salient=model.head_salient(salient_pooled),
        fuse_pooled=fuse_pooled,
        salient_pooled=salient_pooled,
        subtle_pooled=subtle_pooled,
        att=att,
    )
