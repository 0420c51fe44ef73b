from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest
from click.testing import CliRunner

from src.cli import wdce
from wdce.domain.data import TrajectoryRecord, read_trajectory_csv, write_trajectory_csv
from wdce.domain.tensor import dump
from wdce.domain.verify import PropertyResult, SuiteReport
from wdce.lib.serialization import from_json

if TYPE_CHECKING:
    from pathlib import Path

    from pytest_mock import MockerFixture


def flat(output: str) -> str:
    """Undo console wrapping."""
    return " ".join(output.split())


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture()
def micro_data(runner: CliRunner, tmp_path: Path, micro_config_file: Path) -> Path:
    path = tmp_path / "micro.wdcd"
    result = runner.invoke(wdce, ["gen", "--config", str(micro_config_file), "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


@pytest.fixture()
def trained(runner: CliRunner, tmp_path: Path, micro_data: Path, micro_config_file: Path) -> Path:
    out = tmp_path / "run"
    args = ["train", "--data", str(micro_data), "--out", str(out), "--config", str(micro_config_file)]
    result = runner.invoke(wdce, [*args, "--max-steps", "3"])
    assert result.exit_code == 0, result.output
    return out


def test_print_defaults(runner: CliRunner) -> None:
    result = runner.invoke(wdce, ["config", "--print-defaults"])
    assert result.exit_code == 0
    document = from_json(result.output)
    assert document["train"]["contrastive"]["alpha"] == 0.9
    assert document["train"]["contrastive"]["beta"] == 0.1
    assert document["train"]["lambda_fuse"] == 0.4
    assert document["train"]["lambda_salient"] == 0.2
    assert document["train"]["lambda_proto"] == 0.4
    assert document["split_fraction"] == 0.8


def test_config_applies_overrides_and_seed(runner: CliRunner, micro_config_file: Path) -> None:
    args = ["config", "--config", str(micro_config_file), "--set", "train.learning_rate=0.05", "--seed", "9"]
    result = runner.invoke(wdce, args)
    assert result.exit_code == 0, result.output
    document = from_json(result.output.strip().splitlines()[-1])
    assert document["train"]["learning_rate"] == 0.05
    assert document["train"]["seed"] == 9
    assert document["synth"]["seed"] == 9
    assert document["backbone"]["channels"] == [4, 4]


def test_unknown_config_key_exits_2(runner: CliRunner) -> None:
    result = runner.invoke(wdce, ["config", "--set", "train.lr=0.1"])
    assert result.exit_code == 2
    assert "train.lr" in flat(result.output)


def test_gen_is_reproducible(runner: CliRunner, tmp_path: Path, micro_config_file: Path) -> None:
    paths = [tmp_path / "a.wdcd", tmp_path / "b.wdcd"]
    for path in paths:
        result = runner.invoke(wdce, ["gen", "--config", str(micro_config_file), "--out", str(path), "--seed", "4"])
        assert result.exit_code == 0, result.output
        assert "samples=12" in result.output
        assert "discriminability_ratio=" in result.output
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_gen_rejects_invalid_spec(runner: CliRunner, tmp_path: Path) -> None:
    spec = tmp_path / "spec.json"
    spec.write_text('{"frames": 31}', encoding="utf-8")
    result = runner.invoke(wdce, ["gen", "--spec", str(spec), "--out", str(tmp_path / "x.wdcd")])
    assert result.exit_code == 2
    assert "frame count must be even" in flat(result.output)
    assert not (tmp_path / "x.wdcd").exists()


def test_verify_passes(runner: CliRunner) -> None:
    result = runner.invoke(wdce, ["verify", "--suite", "wavelet"])
    assert result.exit_code == 0, result.output
    line = next(line for line in result.output.splitlines() if line.startswith("wavelet.max_error="))
    assert float(line.split("=", 1)[1]) < 1e-10


def test_verify_failure_names_property(runner: CliRunner, mocker: MockerFixture) -> None:
    report = SuiteReport("grad")
    report.add(PropertyResult.below("st_gc_layer", 1e-2, 1e-5))
    mocker.patch("src.cli.run_suites", return_value=[report])
    result = runner.invoke(wdce, ["verify", "--suite", "grad"])
    assert result.exit_code == 1
    assert "grad.st_gc_layer" in flat(result.output)


def constant_records(values: float = 1.5) -> list[TrajectoryRecord]:
    return [TrajectoryRecord(sample_id=0, label=0, values=np.full((2, 6, 3), values))]


def test_dwt_of_constant_trajectory_has_zero_high_band(runner: CliRunner, tmp_path: Path) -> None:
    source = tmp_path / "traj.csv"
    write_trajectory_csv(source, constant_records())
    result = runner.invoke(wdce, ["dwt", "--in", str(source), "--out", str(tmp_path / "bands")])
    assert result.exit_code == 0, result.output
    (high,) = read_trajectory_csv(tmp_path / "bands" / "high.csv")
    (low,) = read_trajectory_csv(tmp_path / "bands" / "low.csv")
    assert high.values.shape == (2, 3, 3)
    np.testing.assert_array_equal(high.values, np.zeros((2, 3, 3)))
    np.testing.assert_allclose(low.values, np.full((2, 3, 3), 1.5 * np.sqrt(2.0)))


def test_dwt_idwt_round_trip_through_files(runner: CliRunner, tmp_path: Path, np_rng: np.random.Generator) -> None:
    records = [
        TrajectoryRecord(sample_id=i, label=i, values=np_rng.normal(scale=10.0, size=(3, 8, 3))) for i in range(3)
    ]
    source = tmp_path / "traj.csv"
    write_trajectory_csv(source, records)
    assert runner.invoke(wdce, ["dwt", "--in", str(source), "--out", str(tmp_path / "bands")]).exit_code == 0
    result = runner.invoke(wdce, ["idwt", "--in", str(tmp_path / "bands"), "--out", str(tmp_path / "back.csv")])
    assert result.exit_code == 0, result.output
    for original, rebuilt in zip(records, read_trajectory_csv(tmp_path / "back.csv"), strict=True):
        assert rebuilt.sample_id == original.sample_id
        assert np.max(np.abs(rebuilt.values - original.values)) < 1e-12


def test_dwt_rejects_odd_frame_count(runner: CliRunner, tmp_path: Path) -> None:
    source = tmp_path / "odd.csv"
    write_trajectory_csv(source, [TrajectoryRecord(0, 0, np.zeros((1, 5, 3)))])
    result = runner.invoke(wdce, ["dwt", "--in", str(source), "--out", str(tmp_path / "bands")])
    assert result.exit_code == 2
    assert "even frame count" in flat(result.output)


def test_malformed_csv_reports_line(runner: CliRunner, tmp_path: Path) -> None:
    source = tmp_path / "bad.csv"
    source.write_text("sample_id,label,joint,frame,x,y,z\n0,0,0,0,1,2,3\n0,0,0,1,1,two,3\n", encoding="utf-8")
    result = runner.invoke(wdce, ["dwt", "--in", str(source), "--out", str(tmp_path / "bands")])
    assert result.exit_code == 2
    assert "line 3" in flat(result.output)


def test_train_writes_run_directory(trained: Path) -> None:
    assert (trained / "model.ckpt").read_bytes()[:4] == b"WDCK"
    metrics = (trained / "metrics.csv").read_text(encoding="utf-8").splitlines()
    assert len(metrics) == 1 + 3
    report = from_json((trained / "report.json").read_bytes())
    assert report["steps"] == 3
    assert report["modality"] == "joint"
    assert 0.0 <= report["test"]["accuracy"] <= 1.0


def test_train_is_reproducible(runner: CliRunner, tmp_path: Path, micro_data: Path, micro_config_file: Path) -> None:
    outs = [tmp_path / "first", tmp_path / "second"]
    for out in outs:
        args = ["train", "--data", str(micro_data), "--out", str(out), "--config", str(micro_config_file)]
        result = runner.invoke(wdce, [*args, "--max-steps", "3", "--modality", "bone"])
        assert result.exit_code == 0, result.output
    for name in ("metrics.csv", "model.ckpt"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_eval_prints_accuracy(runner: CliRunner, trained: Path, micro_data: Path) -> None:
    result = runner.invoke(wdce, ["eval", "--ckpt", str(trained / "model.ckpt"), "--data", str(micro_data)])
    assert result.exit_code == 0, result.output
    accuracy = next(line for line in result.output.splitlines() if line.startswith("accuracy="))
    assert 0.0 <= float(accuracy.split("=", 1)[1]) <= 1.0
    assert "within_pair_confusion=" in result.output


def test_eval_fuses_several_checkpoints(runner: CliRunner, trained: Path, micro_data: Path) -> None:
    ckpt = str(trained / "model.ckpt")
    result = runner.invoke(wdce, ["eval", "--ckpt", ckpt, "--ckpt", ckpt, "--data", str(micro_data), "--subset", "all"])
    assert result.exit_code == 0, result.output
    single = runner.invoke(wdce, ["eval", "--ckpt", ckpt, "--data", str(micro_data), "--subset", "all"])
    assert result.output.splitlines()[-2:] == single.output.splitlines()[-2:]


def test_eval_rejects_mismatched_data(
    runner: CliRunner,
    tmp_path: Path,
    trained: Path,
    micro_config_file: Path,
) -> None:
    other = tmp_path / "other.wdcd"
    args = ["gen", "--config", str(micro_config_file), "--set", "synth.frames=12", "--out", str(other)]
    assert runner.invoke(wdce, args).exit_code == 0
    result = runner.invoke(wdce, ["eval", "--ckpt", str(trained / "model.ckpt"), "--data", str(other)])
    assert result.exit_code == 2
    assert "frames=8" in flat(result.output)


def test_dump_writes_feature_tensors(runner: CliRunner, tmp_path: Path, trained: Path, micro_data: Path) -> None:
    out = tmp_path / "dump"
    result = runner.invoke(wdce, ["dump", "--ckpt", str(trained / "model.ckpt"), "--data", str(micro_data), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "fused=12x4" in result.output
    assert dump.read_tensor(out / "subtle.wdct").shape == (12, 4)
    assert dump.read_tensor(out / "att.wdct").shape == (12, 4 * 7)
    index = (out / "index.csv").read_text(encoding="utf-8").splitlines()
    assert index[0] == "row,sample_id,label"
    assert len(index) == 13


def test_ablate_writes_summary(runner: CliRunner, tmp_path: Path, micro_data: Path, micro_config_file: Path) -> None:
    out = tmp_path / "ablation"
    args = ["ablate", "--data", str(micro_data), "--out", str(out), "--config", str(micro_config_file)]
    result = runner.invoke(wdce, [*args, "--seeds", "0,1", "--variants", "baseline,dwt", "--workers", "2"])
    assert result.exit_code == 0, result.output
    lines = (out / "ablation.csv").read_text(encoding="utf-8").splitlines()
    assert [line.split(",")[:2] for line in lines[1:5]] == [["baseline", "0"], ["baseline", "1"], ["dwt", "0"], ["dwt", "1"]]
    assert {line.split(",")[1] for line in lines[7:9]} == {"baseline", "dwt"}


def test_ablate_rejects_bad_seed_list(runner: CliRunner, tmp_path: Path, micro_data: Path) -> None:
    args = ["ablate", "--data", str(micro_data), "--out", str(tmp_path / "x"), "--seeds", "0,one"]
    result = runner.invoke(wdce, args)
    assert result.exit_code == 2
