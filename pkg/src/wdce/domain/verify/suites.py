"""Property suites run by ``wdce verify``.

Each suite measures errors against fixed bounds and never raises on a failed
property; the caller decides what a failure means.
"""
from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np

from wdce.domain.attention import (
    DecouplingAttentionParams,
    TrajectoryAttentionParams,
    decoupling_attention,
    decoupling_weights,
    trajectory_attention,
)
from wdce.domain.backbone import (
    BackboneConfig,
    SkeletonGraph,
    SsaParams,
    StgcParams,
    build_graph,
    chain_edges,
    ssa_tformer_layer,
    st_gc_layer,
)
from wdce.domain.contrastive import ContrastiveConfig, PrototypeBank, prototype_loss, update_prototypes
from wdce.domain.model import TrainConfig, WdceModel, compute_loss, forward
from wdce.domain.tensor import Rng, Tensor, grad_check, ops
from wdce.domain.verify.results import PropertyResult, SuiteReport
from wdce.domain.wavelet import build_haar, dwt_array, from_trajectories, idwt_array
from wdce.lib.log import get_logger

__all__ = [
    "GRAD_BOUND",
    "SUITES",
    "attention_suite",
    "contrastive_suite",
    "grad_suite",
    "run_suites",
    "wavelet_suite",
]

logger = get_logger()

WAVELET_FRAMES = (2, 4, 8, 16, 32, 64)
RECONSTRUCTION_BOUND = 1e-10
FILTER_BOUND = 1e-12
GRAD_BOUND = 1e-5
ROW_SUM_BOUND = 1e-10
ANALYTIC_BOUND = 1e-9


def wavelet_suite(seed: int = 0) -> SuiteReport:
    """Perfect reconstruction, energy preservation and filter orthogonality."""
    report = SuiteReport("wavelet")
    rng = Rng(seed).split("verify", "wavelet")
    reconstruction = parseval = algebra = 0.0
    for frames in WAVELET_FRAMES:
        x = rng.split(frames).normal((100, frames))
        low, high = dwt_array(x)
        reconstruction = max(reconstruction, float(np.max(np.abs(idwt_array(low, high) - x))))
        energy = np.sum(x * x, axis=1)
        split_energy = np.sum(low * low, axis=1) + np.sum(high * high, axis=1)
        parseval = max(parseval, float(np.max(np.abs(energy - split_energy) / np.maximum(energy, 1e-300))))
        filters = build_haar(frames)
        half = np.eye(frames // 2)
        algebra = max(
            algebra,
            float(np.max(np.abs(filters.low.T @ filters.low - half))),
            float(np.max(np.abs(filters.high.T @ filters.high - half))),
            float(np.max(np.abs(filters.low.T @ filters.high))),
            float(np.max(np.abs(filters.low @ filters.low.T + filters.high @ filters.high.T - np.eye(frames)))),
        )
    report.add(PropertyResult.below("reconstruction", reconstruction, RECONSTRUCTION_BOUND))
    report.add(PropertyResult.below("parseval", parseval, RECONSTRUCTION_BOUND))
    report.add(PropertyResult.below("filter_algebra", algebra, FILTER_BOUND))
    return report


def _micro_graph(joints: int = 5) -> SkeletonGraph:
    return build_graph(chain_edges(joints), joints)


def grad_suite(seed: int = 0, max_coords: int | None = 12) -> SuiteReport:
    """Finite-difference checks of every layer and of the full objective.

    Uses the micro configuration ``N=2, C=8, T=8, V=5, K=3``.
    """
    report = SuiteReport("grad")
    rng = Rng(seed).split("verify", "grad")
    graph = _micro_graph()
    sampler = rng.split("coordinates")

    def check(name: str, f: Callable[..., Tensor], point: list[Tensor]) -> None:
        error = grad_check(f, point, max_coords=max_coords, rng=sampler.split(name))
        report.add(PropertyResult.below(name, error, GRAD_BOUND))

    x = Tensor(rng.split("x").normal((2, 8, 8, 5)))
    weights = Tensor(rng.split("w").normal((2, 8, 8, 5)))

    stgc = StgcParams.init(8, 8, 3, rng.split("stgc"))
    check(
        "st_gc_layer",
        lambda x_, w_, g_, t_: ops.sum(ops.mul(st_gc_layer(x_, graph, stgc), weights)),
        [x, stgc.gcn_w, stgc.gcn_b, stgc.tcn.weight],
    )

    ssa = SsaParams.init(8, 2, 3, rng.split("ssa"))
    check(
        "ssa_tformer_layer",
        lambda x_, *_: ops.sum(ops.mul(ssa_tformer_layer(x_, ssa), weights)),
        [x, ssa.q_w, ssa.k_w, ssa.v_w, ssa.o_w, ssa.tcn.weight],
    )

    da = DecouplingAttentionParams.init(8, 8, rng.split("da"))
    low = Tensor(rng.split("low").normal((2, 40, 4)))
    high = Tensor(rng.split("high").normal((2, 40, 4)))
    band_weights = Tensor(rng.split("bw").normal((2, 8, 4, 5)))

    def decoupling_objective(x_: Tensor, low_: Tensor, high_: Tensor, *_: Tensor) -> Tensor:
        salient, subtle = decoupling_attention(x_, low_, high_, da)
        return ops.add(ops.sum(ops.mul(salient, band_weights)), ops.sum(ops.mul(subtle, subtle)))

    check("decoupling_attention", decoupling_objective, [x, low, high, da.linear_w, da.conv_w, da.conv_b])

    ta = TrajectoryAttentionParams.init(8, 5, rng.split("ta"))
    subtle = Tensor(rng.split("subtle").normal((2, 8, 4, 5)))
    check(
        "trajectory_attention",
        lambda s_, *_: ops.sum(ops.mul(trajectory_attention(s_, ta)[0], band_weights)),
        [subtle, ta.mlp_a_w, ta.mlp_a_b, ta.mlp_b_w, ta.mlp_b_b],
    )

    bank = PrototypeBank.empty(3, 8, 40)
    bank.feat[:] = rng.split("pf").normal((3, 8))
    bank.att[:] = rng.split("pa").normal((3, 40))
    bank.initialized[:] = True
    feats = Tensor(rng.split("feats").normal((2, 8)))
    atts = Tensor(rng.split("atts").normal((2, 40)))
    labels = np.array([0, 2])
    check(
        "prototype_loss",
        lambda f_, a_: prototype_loss(bank, f_, a_, labels, ContrastiveConfig()),
        [feats, atts],
    )

    model = _micro_model(seed)
    model.bank = PrototypeBank.empty(3, 8, 40)
    model.bank.feat[:] = rng.split("mf").normal((3, 8))
    model.bank.att[:] = rng.split("ma").normal((3, 40))
    model.bank.initialized[:] = True
    batch = Tensor(rng.split("batch").normal((2, 3, 8, 5)))
    params = [tensor for _, tensor in model.parameters()]
    check(
        "full_objective",
        lambda *_: compute_loss(model, forward(model, batch), labels).total,
        params,
    )
    return report


def _micro_model(seed: int) -> WdceModel:
    backbone = BackboneConfig(n_stgc=2, n_ssa=1, channels=[8, 8], heads=2, tcn_kernel=3)
    return WdceModel.init(TrainConfig(seed=seed), backbone, _micro_graph(), frames=8, classes=3)


def attention_suite(seed: int = 0) -> SuiteReport:
    """Normalization and range contracts plus the zero-parameter degenerate cases."""
    report = SuiteReport("attention")
    rng = Rng(seed).split("verify", "attention")
    x_embed = Tensor(rng.split("x").normal((2, 3, 8, 5), scale=3.0))
    low = Tensor(rng.split("low").normal((2, 15, 4)))
    high = Tensor(rng.split("high").normal((2, 15, 4)))

    a_low, a_high = decoupling_weights(x_embed, DecouplingAttentionParams.init(3, 8, rng.split("da")))
    weights = np.concatenate([a_low.data, a_high.data])
    outside = float(np.sum((weights <= 0.0) | (weights >= 1.0)))
    report.add(PropertyResult.below("decoupling_weights_in_open_unit_interval", outside, 0.5))

    zeros = DecouplingAttentionParams.zeros(3, 8)
    salient, subtle = decoupling_attention(x_embed, low, high, zeros)
    halved = max(
        float(np.max(np.abs(salient.data - 0.5 * from_trajectories(low, 3, 5).data))),
        float(np.max(np.abs(subtle.data - 0.5 * from_trajectories(high, 3, 5).data))),
    )
    report.add(PropertyResult.below("zero_decoupling_halves_bands", halved, ANALYTIC_BOUND))

    x_subtle = Tensor(rng.split("subtle").normal((2, 3, 4, 5), scale=3.0))
    _, att = trajectory_attention(x_subtle, TrajectoryAttentionParams.init(3, 5, rng.split("ta")))
    report.add(PropertyResult.below("attention_rows_sum_to_one", att.row_sum_error(), ROW_SUM_BOUND))

    enhanced, uniform = trajectory_attention(x_subtle, TrajectoryAttentionParams.zeros(3, 5))
    uniform_error = max(
        float(np.max(np.abs(uniform.values.data - 1.0 / 5))),
        float(np.max(np.abs(enhanced.data - x_subtle.data / 5))),
    )
    report.add(PropertyResult.below("zero_trajectory_attention_is_uniform", uniform_error, ANALYTIC_BOUND))
    return report


def contrastive_suite(seed: int = 0) -> SuiteReport:
    """Closed-form loss values, scale invariance and EMA convergence."""
    report = SuiteReport("contrastive")
    cfg_feature_only = ContrastiveConfig(alpha=1.0, beta=0.0, tau=0.1)

    bank = PrototypeBank.empty(2, 2)
    bank.feat[:] = [[1.0, 0.0], [0.0, 1.0]]
    bank.initialized[:] = True
    equidistant = prototype_loss(bank, Tensor([[1.0, 1.0]]), None, [0], cfg_feature_only).item()
    report.add(PropertyResult.below("equidistant_is_ln2", abs(equidistant - math.log(2.0)), ANALYTIC_BOUND))

    aligned = prototype_loss(bank, Tensor([[1.0, 0.0]]), None, [0], cfg_feature_only).item()
    expected = math.log1p(math.exp(-10.0))
    report.add(PropertyResult.below("aligned_closed_form", abs(aligned - expected), ANALYTIC_BOUND))

    rng = Rng(seed).split("verify", "contrastive")
    wide = PrototypeBank.empty(4, 6)
    wide.feat[:] = rng.split("protos").normal((4, 6))
    wide.initialized[:] = True
    feats = rng.split("feats").normal((5, 6))
    labels = [0, 1, 2, 3, 1]
    scales = rng.split("scales").uniform(0.1, 10.0, (5, 1))
    base = prototype_loss(wide, Tensor(feats), None, labels, cfg_feature_only).item()
    scaled = prototype_loss(wide, Tensor(feats * scales), None, labels, cfg_feature_only).item()
    report.add(PropertyResult.below("scale_invariance", abs(base - scaled), 1e-10))

    ema = PrototypeBank.empty(1, 3, momentum=0.9)
    target = np.array([[0.5, -1.0, 2.0]])
    start = np.array([3.0, 1.0, -1.0])
    ema.feat[0] = start
    ema.initialized[0] = True
    for _ in range(100):
        update_prototypes(ema, target, None, [0], [True])
    bound = 0.9**100 * float(np.linalg.norm(start - target[0])) + 1e-12
    gap = float(np.linalg.norm(ema.feat[0] - target[0]))
    report.add(PropertyResult(name="ema_convergence", value=gap, bound=bound, passed=gap < bound))
    return report


SUITES: dict[str, Callable[[int], SuiteReport]] = {
    "wavelet": wavelet_suite,
    "grad": grad_suite,
    "attention": attention_suite,
    "contrastive": contrastive_suite,
}
"""Suite runners by name; ``all`` runs them in this order."""


def run_suites(suite: str = "all", seed: int = 0) -> list[SuiteReport]:
    """Run one suite, or every suite for ``"all"``."""
    names = list(SUITES) if suite == "all" else [suite]
    reports = []
    for name in names:
        report = SUITES[name](seed)
        logger.info("verify_suite", suite=name, passed=report.passed, max_error=report.max_error)
        reports.append(report)
    return reports
