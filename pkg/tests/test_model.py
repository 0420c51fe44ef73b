from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest
from pydantic import ValidationError

from tests.conftest import MICRO_BACKBONE, MICRO_TRAIN, make_model
from wdce.domain.backbone import BackboneConfig, build_graph
from wdce.domain.data import SynthSpec, generate, split
from wdce.domain.model import (
    ABLATION_PRESETS,
    AblationRun,
    AblationSwitches,
    FitResult,
    SgdState,
    TrainConfig,
    WdceModel,
    bones,
    channel_split_control,
    check_compatible,
    checkpoint_from_bytes,
    checkpoint_to_bytes,
    clip_gradients,
    compute_loss,
    cross_entropy,
    derive_modalities,
    ensemble_logits,
    evaluate_logits,
    fit,
    forward,
    load_checkpoint,
    modality_inputs,
    motion,
    rank_variants,
    run_ablation,
    save_checkpoint,
    sgd_step,
    train_step,
    write_summary,
)
from wdce.domain.model.checkpoint import Checkpoint
from wdce.domain.tensor import Graph, Rng, Tensor, grad_check, ops
from wdce.lib.exceptions import CheckpointMismatchError, ConfigurationError, LabelError, ShapeError, TrainingError

if TYPE_CHECKING:
    from pathlib import Path

    from wdce.domain.backbone import SkeletonGraph
    from wdce.domain.data import Dataset


def micro_inputs(rng: Rng, n: int = 4) -> np.ndarray:
    return rng.split("batch").normal((n, 3, 8, 5))


def test_forward_shapes_for_every_preset(variant: str, rng: Rng) -> None:
    model = make_model(variant)
    output = forward(model, Tensor(micro_inputs(rng, 3)))
    width = 2 if model.config.switches.use_channel_split else 4
    assert output.logits_fuse.shape == (3, 4)
    assert output.logits_salient.shape == (3, 4)
    assert output.subtle_pooled.shape == (3, width)
    if model.config.switches.use_ta:
        assert output.att is not None
        assert output.att.values.shape == (3, width, 5)
        assert output.att_flat().shape == (3, width * 5)
    else:
        assert output.att is None


def test_optional_blocks_follow_switches(variant: str) -> None:
    model = make_model(variant)
    switches = ABLATION_PRESETS[variant]
    assert (model.decoupling is not None) == switches.use_da
    assert (model.trajectory is not None) == switches.use_ta
    assert (model.bank is not None) == switches.use_pcl


def test_forward_rejects_wrong_frame_count(rng: Rng) -> None:
    with pytest.raises(ShapeError):
        forward(make_model(), Tensor(rng.normal((2, 3, 10, 5))))


def test_channel_split_control_halves_channels_and_time(rng: Rng) -> None:
    x = Tensor(rng.normal((2, 4, 8, 3)))
    salient, subtle = channel_split_control(x)
    assert salient.shape == (2, 2, 4, 3)
    np.testing.assert_allclose(salient.data[:, :, 0], x.data[:, :2, 0:2].mean(axis=2))
    np.testing.assert_allclose(subtle.data[:, :, 3], x.data[:, 2:, 6:8].mean(axis=2))
    with pytest.raises(ShapeError):
        channel_split_control(Tensor(np.zeros((1, 3, 8, 2))))


def test_switch_combinations_are_validated() -> None:
    with pytest.raises(ValidationError):
        AblationSwitches(use_channel_split=True)
    with pytest.raises(ValidationError):
        AblationSwitches(use_dwt=False, use_da=False, use_ta=False, use_pcl=True)


def test_train_config_validates_schedule() -> None:
    with pytest.raises(ValidationError):
        TrainConfig(milestones=[0.8, 0.6])
    with pytest.raises(ValidationError):
        TrainConfig(da_kernel=4)


def test_learning_rate_decays_at_milestones() -> None:
    config = TrainConfig(epochs=10, learning_rate=0.1, milestones=[0.6, 0.8], decay=0.1)
    assert config.milestone_epochs() == [6, 8]
    assert config.learning_rate_at(5) == pytest.approx(0.1)
    assert config.learning_rate_at(6) == pytest.approx(0.01)
    assert config.learning_rate_at(9) == pytest.approx(0.001)


def test_cross_entropy_of_uniform_logits_is_log_k() -> None:
    loss = cross_entropy(Tensor(np.zeros((3, 5))), [0, 2, 4])
    assert math.isclose(loss.item(), math.log(5.0), rel_tol=1e-12)
    with pytest.raises(LabelError):
        cross_entropy(Tensor(np.zeros((1, 5))), [5])


def test_proto_term_is_zero_without_contrastive_loss(rng: Rng) -> None:
    model = make_model("dwt_da_ta")
    output = forward(model, Tensor(micro_inputs(rng)))
    terms = compute_loss(model, output, [0, 1, 2, 3])
    assert terms.proto.item() == 0.0
    expected = 0.4 * terms.fuse.item() + 0.2 * terms.salient.item()
    assert terms.total.item() == pytest.approx(expected)


def test_proto_contribution_scales_with_its_weight(rng: Rng) -> None:
    model = make_model("full")
    assert model.bank is not None
    model.bank.feat[:] = rng.split("feat").normal(model.bank.feat.shape)
    model.bank.att[:] = rng.split("att").normal(model.bank.att.shape)
    model.bank.initialized[:] = True
    output = forward(model, Tensor(micro_inputs(rng)))
    totals = {}
    for weight in (0.0, 0.4, 0.8):
        model.config = model.config.model_copy(update={"lambda_proto": weight})
        terms = compute_loss(model, output, [0, 1, 2, 3])
        assert terms.proto.item() > 0.0
        totals[weight] = terms.total.item()
    single = totals[0.4] - totals[0.0]
    assert single > 0.0
    assert totals[0.8] - totals[0.0] == pytest.approx(2.0 * single, rel=1e-12)


def test_full_objective_gradients(rng: Rng) -> None:
    model = make_model("full", d_att=2)
    assert model.bank is not None
    model.bank.feat[:] = rng.split("feat").normal(model.bank.feat.shape)
    model.bank.att[:] = rng.split("att").normal(model.bank.att.shape)
    model.bank.initialized[:] = True
    batch = micro_inputs(rng, 2)
    head = model.head_fuse.weight
    trajectory = model.trajectory
    assert trajectory is not None
    mlp = trajectory.mlp_a_w

    def objective(w: Tensor, a: Tensor) -> Tensor:
        model.head_fuse.weight, trajectory.mlp_a_w = w, a
        return compute_loss(model, forward(model, Tensor(batch)), [1, 3]).total

    assert grad_check(objective, [head, mlp], max_coords=8, rng=rng.split("coords")) < 1e-5


def test_train_step_updates_parameters_and_bank(rng: Rng) -> None:
    model = make_model("full")
    before = model.head_fuse.weight.data.copy()
    state = SgdState()
    metrics = train_step(model, micro_inputs(rng), [0, 1, 2, 3], state, learning_rate=0.1)
    assert state.steps == 1
    assert metrics.step == 1
    assert not np.array_equal(model.head_fuse.weight.data, before)
    assert set(state.velocity) == {name for name, _ in model.parameters()}
    assert model.bank is not None
    assert model.bank.initialized.sum() == round(metrics.acc_fuse * 4)


def test_non_finite_batch_leaves_parameters_untouched(rng: Rng) -> None:
    model = make_model("dwt_da")
    snapshot = {name: tensor.data.copy() for name, tensor in model.parameters()}
    batch = micro_inputs(rng)
    batch[0, 0, 0, 0] = np.nan
    state = SgdState()
    with pytest.raises(TrainingError) as excinfo:
        train_step(model, batch, [0, 1, 2, 3], state, learning_rate=0.1)
    assert excinfo.value.term == "loss_fuse"
    assert state.steps == 0
    for name, tensor in model.parameters():
        np.testing.assert_array_equal(tensor.data, snapshot[name])


def test_sgd_step_applies_momentum_and_weight_decay() -> None:
    param = Tensor([1.0], requires_grad=True)
    state = SgdState()
    for _ in range(2):
        param.grad = np.array([0.5])
        sgd_step(state, [("p", param)], learning_rate=0.1, momentum=0.9, weight_decay=0.1)
    # v1 = 0.6, p1 = 0.94; v2 = 0.9 * 0.6 + 0.5 + 0.094
    np.testing.assert_allclose(param.data, [0.94 - 0.1 * 1.134])
    assert state.steps == 2


def test_clip_gradients_scales_to_global_norm() -> None:
    a, b = Tensor([0.0], requires_grad=True), Tensor([0.0], requires_grad=True)
    a.grad, b.grad = np.array([3.0]), np.array([4.0])
    assert clip_gradients([("a", a), ("b", b)], 1.0) == pytest.approx(5.0)
    np.testing.assert_allclose([a.grad[0], b.grad[0]], [0.6, 0.8])
    assert clip_gradients([("a", a), ("b", b)], 10.0) == pytest.approx(1.0)
    np.testing.assert_allclose([a.grad[0], b.grad[0]], [0.6, 0.8])


def test_evaluate_logits_counts_within_pair_confusion() -> None:
    logits = np.eye(4)[[1, 1, 3, 0]]
    report = evaluate_logits(logits, [0, 1, 2, 3], 4)
    assert report.accuracy == 0.25
    assert report.within_pair_confusion == 0.5
    assert report.per_class == {0: 0.0, 1: 1.0, 2: 0.0, 3: 0.0}
    assert report.confusion[2][3] == 1
    assert report.as_dict()["per_class"]["1"] == 1.0


def test_evaluate_logits_checks_shape() -> None:
    with pytest.raises(ShapeError):
        evaluate_logits(np.zeros((2, 3)), [0, 1, 2], 3)


def test_modalities(rng: Rng, micro_graph: SkeletonGraph) -> None:
    coords = rng.normal((2, 3, 6, 5))
    streams = derive_modalities(coords, micro_graph)
    assert set(streams) == {"joint", "bone", "joint_motion", "bone_motion"}
    np.testing.assert_array_equal(streams["bone"][..., 0], 0.0)
    np.testing.assert_allclose(streams["bone"][..., 3], coords[..., 3] - coords[..., 2])
    np.testing.assert_array_equal(streams["joint_motion"][:, :, -1], 0.0)
    np.testing.assert_allclose(streams["joint_motion"][:, :, 0], coords[:, :, 1] - coords[:, :, 0])
    np.testing.assert_array_equal(modality_inputs(coords, micro_graph, "bone_motion"), motion(bones(coords, micro_graph)))


def test_unknown_modality_is_rejected(micro_graph: SkeletonGraph) -> None:
    with pytest.raises(ConfigurationError, match="unknown modality"):
        modality_inputs(np.zeros((1, 3, 4, 5)), micro_graph, "velocity")


def test_ensemble_averages_members() -> None:
    fused = ensemble_logits([np.array([[1.0, 3.0]]), np.array([[3.0, -1.0]])])
    np.testing.assert_array_equal(fused, [[2.0, 1.0]])
    with pytest.raises(ConfigurationError):
        ensemble_logits([])
    with pytest.raises(ShapeError):
        ensemble_logits([np.zeros((1, 2)), np.zeros((2, 2))])


def micro_fit(dataset: Dataset, path: Path | None = None, **train: object) -> tuple[WdceModel, FitResult]:
    graph = build_graph(dataset.edges, dataset.joints)
    config = TrainConfig(**{**MICRO_TRAIN, **train})
    model = WdceModel.init(config, BackboneConfig(**MICRO_BACKBONE), graph, dataset.frames, dataset.classes)
    result = fit(model, dataset.coordinates(), dataset.labels, metrics_path=path, max_steps=4)
    return model, result


def test_fit_is_reproducible(tmp_path: Path, micro_dataset: Dataset) -> None:
    first_model, first = micro_fit(micro_dataset, tmp_path / "a" / "metrics.csv")
    second_model, _ = micro_fit(micro_dataset, tmp_path / "b" / "metrics.csv")
    first_bytes = (tmp_path / "a" / "metrics.csv").read_bytes()
    assert first_bytes == (tmp_path / "b" / "metrics.csv").read_bytes()
    lines = first_bytes.decode().splitlines()
    assert lines[0] == "epoch,step,loss_total,loss_fuse,loss_salient,loss_proto,acc_fuse"
    assert len(lines) == 1 + 4
    assert first.state.steps == 4
    assert first.train_report is not None
    for (_, a), (_, b) in zip(first_model.parameters(), second_model.parameters(), strict=True):
        np.testing.assert_array_equal(a.data, b.data)


def test_fit_rejects_misaligned_labels(micro_dataset: Dataset) -> None:
    model = make_model(joints=7, classes=2)
    with pytest.raises(ShapeError):
        fit(model, micro_dataset.coordinates(), micro_dataset.labels[:-1])


def test_checkpoint_round_trips_byte_for_byte(tmp_path: Path, micro_dataset: Dataset) -> None:
    model, result = micro_fit(micro_dataset)
    checkpoint = Checkpoint(model=model, state=result.state, modality="bone", epoch=2)
    path = tmp_path / "run" / "model.ckpt"
    save_checkpoint(path, checkpoint)
    data = path.read_bytes()
    assert data[:4] == b"WDCK"
    assert checkpoint_to_bytes(checkpoint) == data
    loaded = load_checkpoint(path)
    assert loaded.modality == "bone"
    assert loaded.state.steps == 4
    assert checkpoint_to_bytes(loaded) == data
    assert loaded.model.bank is not None
    np.testing.assert_array_equal(loaded.model.bank.initialized, model.bank.initialized)  # type: ignore[union-attr]
    assert loaded.model.bank.updates == model.bank.updates  # type: ignore[union-attr]
    inputs = micro_dataset.coordinates()
    with_original = forward(model, Tensor(inputs)).logits_fuse.data
    np.testing.assert_array_equal(forward(loaded.model, Tensor(inputs)).logits_fuse.data, with_original)


def test_truncated_checkpoint_is_rejected() -> None:
    data = checkpoint_to_bytes(Checkpoint(model=make_model("baseline"), state=SgdState()))
    with pytest.raises(ValueError, match="truncated"):
        checkpoint_from_bytes(data[:-3])


def test_check_compatible_names_the_mismatch(micro_dataset: Dataset) -> None:
    check_compatible(make_model(joints=7, classes=2), micro_dataset)
    with pytest.raises(CheckpointMismatchError, match="joints=5"):
        check_compatible(make_model(classes=2), micro_dataset)
    with pytest.raises(CheckpointMismatchError, match="classes=4"):
        check_compatible(make_model(joints=7), micro_dataset)


def test_run_ablation_returns_runs_in_job_order(tmp_path: Path, micro_dataset: Dataset) -> None:
    runs = run_ablation(
        micro_dataset,
        [0, 1],
        TrainConfig(**MICRO_TRAIN),
        BackboneConfig(**MICRO_BACKBONE),
        split_fraction=0.5,
        variants=["baseline", "full"],
        out_dir=tmp_path,
        workers=2,
    )
    assert [(run.variant, run.seed) for run in runs] == [("baseline", 0), ("baseline", 1), ("full", 0), ("full", 1)]
    assert all(0.0 <= run.accuracy <= 1.0 for run in runs)
    assert (tmp_path / "full" / "seed-1" / "model.ckpt").exists()
    assert (tmp_path / "baseline" / "seed-0" / "metrics.csv").exists()


def test_run_ablation_rejects_unknown_variant(micro_dataset: Dataset) -> None:
    with pytest.raises(ConfigurationError, match="unknown"):
        run_ablation(micro_dataset, [0], TrainConfig(**MICRO_TRAIN), BackboneConfig(**MICRO_BACKBONE), variants=["nope"])


def test_rank_variants_orders_by_mean_accuracy(tmp_path: Path) -> None:
    runs = [
        AblationRun("baseline", 0, 0.5, 0.4, 0.9),
        AblationRun("baseline", 1, 0.7, 0.2, 0.9),
        AblationRun("full", 0, 0.8, 0.1, 1.0),
        AblationRun("full", 1, 0.8, 0.1, 1.0),
    ]
    rows = rank_variants(runs)
    assert [(row.rank, row.variant) for row in rows] == [(1, "full"), (2, "baseline")]
    assert rows[1].mean_accuracy == pytest.approx(0.6)
    assert rows[1].std_accuracy == pytest.approx(0.1)
    path = tmp_path / "ablation.csv"
    write_summary(path, runs, rows)
    text = path.read_text(encoding="utf-8").splitlines()
    assert text[0] == "variant,seed,accuracy,within_pair_confusion,train_accuracy"
    assert text[6].startswith("rank,")
    assert text[7].startswith("1,full,0.8,")


def moving_average(values: list[float], window: int = 10) -> np.ndarray:
    return np.convolve(np.asarray(values), np.ones(window) / window, mode="valid")


@pytest.mark.slow()
def test_full_model_fits_easy_regime() -> None:
    dataset = generate(SynthSpec(rho=0.5, sigma=0.01, samples_per_class=40))
    train, _ = split(dataset, 0.8, seed=0)
    graph = build_graph(dataset.edges, dataset.joints)
    # one full batch per epoch, so steps and epochs coincide
    config = TrainConfig(epochs=200, batch_size=len(train))
    model = WdceModel.init(config, BackboneConfig(), graph, dataset.frames, dataset.classes)
    result = fit(model, train.coordinates(), train.labels, max_steps=200)
    assert result.state.steps == 200
    assert result.train_report is not None
    assert result.train_report.accuracy >= 0.95

    first_milestone = config.milestone_epochs()[0]
    settled = [m.loss_total for m in result.history if m.epoch >= first_milestone]
    assert len(settled) >= 20
    assert np.all(np.diff(moving_average(settled)) <= 1e-4)


@pytest.mark.slow()
def test_decoupled_components_beat_their_controls() -> None:
    runs = run_ablation(
        generate(SynthSpec()),
        [0, 1, 2],
        TrainConfig(epochs=20, batch_size=32),
        BackboneConfig(),
        variants=["baseline", "split_da", "dwt_da", "full"],
        workers=2,
    )
    means = {row.variant: row.mean_accuracy for row in rank_variants(runs)}
    assert means["full"] >= means["baseline"] + 0.05
    assert means["dwt_da"] > means["split_da"]


def test_graph_records_full_forward(rng: Rng) -> None:
    model = make_model("full")
    with Graph() as graph:
        output = forward(model, Tensor(micro_inputs(rng)))
        loss = ops.sum(output.logits_fuse)
    graph.backward(loss)
    assert model.head_fuse.weight.grad is not None
    assert model.backbone.stgc[0].gcn_w.grad is not None
