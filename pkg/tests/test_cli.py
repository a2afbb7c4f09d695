"""Tests for the robnet command-line interface."""

import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from src import __version__
from src.cli import cli
from src.checkpoint import save_checkpoint
from src.dataset import DatasetManifest, DatasetRecipe, write_curve_csv, write_edge_list
from src.graph import Graph
from src.model import ModelConfig, build_model


@pytest.fixture
def runner():
    return CliRunner()


def star_file(tmp_path, name="star.edges"):
    path = tmp_path / name
    write_edge_list(Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)]), path)
    return path


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_simulate_writes_csv_to_stdout(runner, tmp_path):
    result = runner.invoke(cli, ["-q", "simulate", str(star_file(tmp_path)), "--reps", "2"])
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert lines[0] == "i,r_true"
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert np.allclose(values, [1.0, 1 / 3, 0.5, 1.0], atol=1e-9)


def test_simulate_multiple_inputs_needs_out(runner, tmp_path):
    a = star_file(tmp_path, "a.edges")
    b = star_file(tmp_path, "b.edges")
    result = runner.invoke(cli, ["-q", "simulate", str(a), str(b)])
    assert result.exit_code == 1
    assert "error: config:" in result.output

    result = runner.invoke(cli, ["-q", "simulate", str(a), str(b), "--out", str(tmp_path / "curves"),
                                 "--measure", "controllability", "--reps", "1"])
    assert result.exit_code == 0
    assert (tmp_path / "curves" / "a.csv").is_file()
    assert (tmp_path / "curves" / "b.csv").is_file()


def test_malformed_edge_list_reports_line(runner, tmp_path):
    bad = tmp_path / "bad.edges"
    bad.write_text("# robnet v1 directed=0 n=3\n0 7\n", encoding="ascii")
    result = runner.invoke(cli, ["-q", "simulate", str(bad)])
    assert result.exit_code == 1
    assert "error: edgelist: line 2" in result.output


def test_missing_argument_is_a_usage_error(runner):
    result = runner.invoke(cli, ["simulate"])
    assert result.exit_code == 2


def test_corrupt_checkpoint(runner, tmp_path):
    checkpoint = tmp_path / "broken.sppc"
    checkpoint.write_bytes(b"not a checkpoint")
    result = runner.invoke(cli, ["-q", "predict", str(checkpoint), "--edges", str(star_file(tmp_path)),
                                 "--out", str(tmp_path / "p")])
    assert result.exit_code == 1
    assert "error: corrupt:" in result.output


def test_convert_and_info(runner, tmp_path):
    pairs = tmp_path / "pairs.txt"
    pairs.write_text("a b\nb c\nc a\nd e\n", encoding="utf-8")
    out = tmp_path / "net.edges"
    result = runner.invoke(cli, ["-q", "convert", str(pairs), str(out), "--undirected", "--lcc"])
    assert result.exit_code == 0
    assert out.read_text(encoding="ascii").splitlines()[0] == "# robnet v1 directed=0 n=3"

    result = runner.invoke(cli, ["-q", "info", str(out)])
    assert result.exit_code == 0
    assert "Network Information" in result.output
    assert "Connectivity robustness" in result.output


def test_plot(runner, tmp_path):
    write_curve_csv(tmp_path / "c.csv", [1.0, 0.5, 0.25], [0.9, 0.5, 0.3])
    result = runner.invoke(cli, ["-q", "plot", str(tmp_path / "c.csv"), str(tmp_path / "c.svg"), "--title", "star"])
    assert result.exit_code == 0
    assert "<polyline" in (tmp_path / "c.svg").read_text(encoding="utf-8")


def write_predictions(directory, offset, count=6):
    directory.mkdir()
    truth = np.linspace(1.0, 0.1, 10)
    for i in range(count):
        write_curve_csv(directory / f"test-{i:05d}.csv", truth, np.clip(truth + offset + 0.001 * i, 0.0, 1.0))


def test_eval_compares_two_methods(runner, tmp_path):
    write_predictions(tmp_path / "sppcnn", 0.01)
    write_predictions(tmp_path / "baseline", -0.08)
    report = tmp_path / "report.csv"
    summary = tmp_path / "summary.csv"
    result = runner.invoke(cli, ["-q", "eval", str(tmp_path / "sppcnn"), str(tmp_path / "baseline"),
                                 "--report", str(report), "--summary", str(summary)])
    assert result.exit_code == 0
    assert "Kruskal-Wallis" in result.output
    assert "+" in result.output

    frame = pd.read_csv(report)
    assert len(frame) == 12
    assert set(frame["method"]) == {"sppcnn", "baseline"}
    assert len(pd.read_csv(summary)) == 2


def test_eval_rejects_csv_without_prediction(runner, tmp_path):
    write_curve_csv(tmp_path / "truth.csv", [1.0, 0.5])
    result = runner.invoke(cli, ["-q", "eval", str(tmp_path / "truth.csv")])
    assert result.exit_code == 1
    assert "error: dataset:" in result.output


def test_generate_train_predict_eval_bench(runner, tmp_path):
    data = tmp_path / "data"
    result = runner.invoke(cli, ["-q", "gen", "--out", str(data), "--models", "ER,SF", "--size", "20,24",
                                 "--count", "2", "--reps", "1", "--seed", "3"])
    assert result.exit_code == 0, result.output
    manifest = data / "manifest.json"
    assert manifest.is_file()

    checkpoint = tmp_path / "model.sppc"
    result = runner.invoke(cli, ["-q", "train", str(manifest), "--out", str(checkpoint), "--config", "reduced",
                                 "--output-len", "16", "--epochs", "1", "--accumulation", "2"])
    assert result.exit_code == 0, result.output
    assert checkpoint.is_file()

    predictions = tmp_path / "predictions"
    result = runner.invoke(cli, ["-q", "predict", str(checkpoint), "--manifest", str(manifest),
                                 "--edges", str(data / "train-00000.edges"), "--out", str(predictions)])
    assert result.exit_code == 0, result.output
    both = pd.read_csv(predictions / "train-00001.csv")
    assert list(both.columns) == ["i", "r_true", "r_pred"]
    only = pd.read_csv(predictions / "train-00000.csv")
    assert list(only.columns) == ["i", "r_pred"]

    (predictions / "train-00000.csv").unlink()
    result = runner.invoke(cli, ["-q", "eval", str(predictions / "train-00001.csv"), "--manifest", str(manifest)])
    assert result.exit_code == 0, result.output
    assert "Prediction error" in result.output

    report = tmp_path / "bench.csv"
    result = runner.invoke(cli, ["-q", "bench", str(manifest), str(checkpoint), "--limit", "1",
                                 "--warmups", "0", "--reps", "1", "--report", str(report)])
    assert result.exit_code == 0, result.output
    assert set(pd.read_csv(report)["method"]) == {"simulation", "sppcnn"}


TINY = ModelConfig(conv_groups=((3, 2), (3, 2)), spp_levels=(1, 2), fc_widths=(10, 4, 3), name="tiny")


def ring_file(tmp_path, n=10):
    path = tmp_path / "ring.edges"
    write_edge_list(Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)]), path)
    return path


def tiny_checkpoint(tmp_path):
    path = tmp_path / "tiny.sppc"
    save_checkpoint(build_model(TINY, 0).checkpoint({"measure": "connectivity"}), path)
    return path


def test_zero_repetitions_is_a_one_line_config_error(runner, tmp_path):
    result = runner.invoke(cli, ["-q", "simulate", str(star_file(tmp_path)), "--reps", "0"])
    assert result.exit_code == 1
    errors = [line for line in result.output.splitlines() if line.startswith("error:")]
    assert len(errors) == 1
    assert errors[0].startswith("error: config:")
    assert "Traceback" not in result.output
    assert isinstance(result.exception, SystemExit)


def test_zero_resize_width_is_a_config_error(runner, tmp_path):
    result = runner.invoke(cli, ["-q", "predict", str(tiny_checkpoint(tmp_path)), "--edges", str(ring_file(tmp_path)),
                                 "--out", str(tmp_path / "p"), "--resize", "0"])
    assert result.exit_code == 1
    assert "error: config:" in result.output


def test_recipe_split_is_kept_without_flag(runner, tmp_path):
    recipe = tmp_path / "recipe.json"
    plan = DatasetRecipe(models=("ER",), size_range=(20, 24), count=1, repetitions=1, split="test")
    recipe.write_text(json.dumps(plan.to_dict()), encoding="utf-8")

    result = runner.invoke(cli, ["-q", "gen", "--out", str(tmp_path / "kept"), "--recipe", str(recipe)])
    assert result.exit_code == 0, result.output
    kept = DatasetManifest.load(tmp_path / "kept" / "manifest.json")
    assert kept.recipe["split"] == "test"
    assert kept.entries[0].instance_id == "test-00000"

    result = runner.invoke(cli, ["-q", "gen", "--out", str(tmp_path / "moved"), "--recipe", str(recipe),
                                 "--split", "train"])
    assert result.exit_code == 0, result.output
    moved = DatasetManifest.load(tmp_path / "moved" / "manifest.json")
    assert moved.entries[0].instance_id == "train-00000"


def test_edge_list_prediction_can_be_plotted(runner, tmp_path):
    out = tmp_path / "p"
    result = runner.invoke(cli, ["-q", "predict", str(tiny_checkpoint(tmp_path)), "--edges", str(ring_file(tmp_path)),
                                 "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / "ring.csv")
    assert list(frame.columns) == ["i", "r_pred"]
    assert len(frame) == 10

    result = runner.invoke(cli, ["-q", "plot", str(out / "ring.csv"), str(tmp_path / "ring.svg")])
    assert result.exit_code == 0, result.output
    svg = (tmp_path / "ring.svg").read_text(encoding="utf-8")
    assert 'class="pred"' in svg
    assert 'class="true"' not in svg

    result = runner.invoke(cli, ["-q", "eval", str(out / "ring.csv")])
    assert result.exit_code == 1
    assert "error: dataset:" in result.output
