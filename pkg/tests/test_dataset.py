"""Tests for edge lists, curve CSVs, recipes and dataset manifests."""

import json

import numpy as np
import pytest

from src.dataset import (
    MANIFEST_NAME,
    DatasetManifest,
    DatasetRecipe,
    build_dataset,
    convert_pairs,
    format_edge_list,
    load_training_pairs,
    parse_edge_list,
    read_curve_csv,
    write_curve_csv,
    write_edge_list,
)
from src.errors import DatasetError, EdgeListError, GenerationError
from src.graph import Graph
from src.robustness import Measure


def write(path, text):
    path.write_text(text, encoding="ascii")
    return path


def small_recipe(**overrides):
    values = dict(models=("ER", "QS"), size_range=(30, 40), count=3, repetitions=2, seed=5)
    values.update(overrides)
    return DatasetRecipe(**values)


def test_edge_list_format():
    graph = Graph.from_edges(4, [(2, 1), (0, 3)], directed=True)
    assert format_edge_list(graph) == "# robnet v1 directed=1 n=4\n0 3\n2 1\n"


def test_edge_list_write_and_parse(tmp_path):
    graph = Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    write_edge_list(graph, tmp_path / "g.edges")
    assert (tmp_path / "g.edges").read_bytes().count(b"\r") == 0
    parsed = parse_edge_list(tmp_path / "g.edges")
    assert not parsed.directed
    assert parsed.n_initial == 5
    assert parsed.edges() == graph.edges()


def test_isolated_nodes_survive_through_header(tmp_path):
    path = write(tmp_path / "g.edges", "# robnet v1 directed=0 n=6\n0 1\n")
    graph = parse_edge_list(path)
    assert graph.n_alive == 6
    assert graph.edge_count == 1


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("# something else\n0 1\n", 1),
        ("# robnet v2 directed=0 n=3\n0 1\n", 1),
        ("# robnet v1 directed=0 n=3\n0 1\n1 2 3\n", 3),
        ("# robnet v1 directed=0 n=3\n0 x\n", 2),
        ("# robnet v1 directed=0 n=3\n0 1\n\n2 3\n", 4),
        ("# robnet v1 directed=0 n=3\n1 1\n", 2),
    ],
)
def test_malformed_edge_lists_name_the_line(tmp_path, text, line):
    path = write(tmp_path / "bad.edges", text)
    with pytest.raises(EdgeListError) as excinfo:
        parse_edge_list(path)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)


def test_duplicates_dropped_unless_strict(tmp_path):
    path = write(tmp_path / "dup.edges", "# robnet v1 directed=0 n=3\n0 1\n1 0\n1 2\n")
    assert parse_edge_list(path).edge_count == 2
    with pytest.raises(EdgeListError) as excinfo:
        parse_edge_list(path, strict=True)
    assert excinfo.value.line == 3


def test_directed_antiparallel_arcs_are_not_duplicates(tmp_path):
    path = write(tmp_path / "arcs.edges", "# robnet v1 directed=1 n=2\n0 1\n1 0\n")
    assert parse_edge_list(path, strict=True).edge_count == 2


def test_convert_pairs_relabels_densely(tmp_path):
    path = tmp_path / "pairs.txt"
    path.write_text("% comment\nalice,bob\nbob carol\ncarol carol\nalice bob\n", encoding="utf-8")
    result = convert_pairs(path, directed=True)
    assert result.labels == ["alice", "bob", "carol"]
    assert result.graph.directed
    assert result.graph.edges() == [(0, 1), (1, 2)]
    assert result.dropped_self_loops == 1
    assert result.dropped_duplicates == 1


def test_convert_pairs_largest_component_and_erased_directions(tmp_path):
    path = tmp_path / "pairs.txt"
    path.write_text("x y\nq r\nr s\ns q\nt q\n", encoding="utf-8")
    result = convert_pairs(path, directed=True, largest_component=True, erase_directions=True)
    assert not result.graph.directed
    assert result.labels == ["q", "r", "s", "t"]
    assert result.graph.n_initial == 4
    assert result.graph.edge_count == 4


def test_convert_pairs_rejects_empty_and_single_labels(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n", encoding="utf-8")
    with pytest.raises(EdgeListError):
        convert_pairs(empty)
    lonely = tmp_path / "lonely.txt"
    lonely.write_text("a b\nc\n", encoding="utf-8")
    with pytest.raises(EdgeListError) as excinfo:
        convert_pairs(lonely)
    assert excinfo.value.line == 2


def test_curve_csv_round_trip(tmp_path):
    values = np.array([1.0, 0.5, 1 / 3])
    write_curve_csv(tmp_path / "c.csv", values, [0.9, 0.4, 0.3])
    text = (tmp_path / "c.csv").read_text()
    assert text.splitlines()[0] == "i,r_true,r_pred"
    assert "0.333333333" in text
    r_true, r_pred = read_curve_csv(tmp_path / "c.csv")
    assert np.allclose(r_true, values, atol=1e-9)
    assert np.allclose(r_pred, [0.9, 0.4, 0.3])

    write_curve_csv(tmp_path / "t.csv", values)
    _, r_pred = read_curve_csv(tmp_path / "t.csv")
    assert r_pred is None


def test_curve_csv_errors(tmp_path):
    with pytest.raises(DatasetError):
        write_curve_csv(tmp_path / "x.csv", [1.0, 0.5], [1.0])
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(DatasetError):
        read_curve_csv(tmp_path / "empty.csv")
    (tmp_path / "noheader.csv").write_text("i,value\n0,1\n")
    with pytest.raises(DatasetError):
        read_curve_csv(tmp_path / "noheader.csv")


def test_recipe_validation_and_round_trip(tmp_path):
    recipe = small_recipe(models="S2", size_range="Nb")
    assert recipe.models == ("ER", "QS", "SF", "SW-NW")
    assert recipe.size_range == (300, 700)
    assert DatasetRecipe.from_dict(json.loads(json.dumps(recipe.to_dict()))) == recipe

    path = tmp_path / "recipe.json"
    path.write_text(json.dumps(recipe.to_dict()))
    assert DatasetRecipe.from_file(path).fingerprint() == recipe.fingerprint()
    assert small_recipe(seed=6).fingerprint() != recipe.fingerprint()

    with pytest.raises(DatasetError):
        small_recipe(count=0)
    with pytest.raises(DatasetError):
        small_recipe(split="dev")
    with pytest.raises(ValueError):
        small_recipe(measure="entropy")
    path.write_text("{not json")
    with pytest.raises(DatasetError):
        DatasetRecipe.from_file(path)


def test_build_dataset_writes_manifest_and_files(tmp_path):
    manifest = build_dataset(small_recipe(), tmp_path, workers=1)
    assert [e.instance_id for e in manifest.entries] == ["train-00000", "train-00001", "train-00002"]
    assert [e.model for e in manifest.entries] == ["ER", "QS", "ER"]

    loaded = DatasetManifest.load(tmp_path / MANIFEST_NAME)
    assert loaded.fingerprint == small_recipe().fingerprint()
    for entry in loaded.entries:
        assert 30 <= entry.n <= 40
        graph = loaded.graph(entry)
        curve = loaded.curve(entry)
        assert graph.n_alive == entry.n == len(curve)
        assert curve.measure is Measure.CONNECTIVITY
    assert len(load_training_pairs([tmp_path / MANIFEST_NAME])) == 3


def test_build_dataset_is_reproducible_and_split_aware(tmp_path):
    a = build_dataset(small_recipe(), tmp_path / "a", workers=1)
    b = build_dataset(small_recipe(), tmp_path / "b", workers=2)
    test = build_dataset(small_recipe(split="test"), tmp_path / "t", workers=1)
    for ea, eb in zip(a.entries, b.entries):
        assert ea == eb
        assert (tmp_path / "a" / ea.edge_file).read_bytes() == (tmp_path / "b" / eb.edge_file).read_bytes()
        assert (tmp_path / "a" / ea.curve_file).read_bytes() == (tmp_path / "b" / eb.curve_file).read_bytes()
    assert [e.seed for e in test.entries] != [e.seed for e in a.entries]
    assert test.entries[0].instance_id == "test-00000"


def test_manifest_load_checks(tmp_path):
    build_dataset(small_recipe(count=2), tmp_path, workers=1)
    path = tmp_path / MANIFEST_NAME
    data = json.loads(path.read_text())

    data["entries"][1]["instance_id"] = data["entries"][0]["instance_id"]
    path.write_text(json.dumps(data))
    with pytest.raises(DatasetError):
        DatasetManifest.load(path)

    data = json.loads(path.read_text())
    data["entries"][1]["instance_id"] = "train-00001"
    data["entries"][1]["edge_file"] = "missing.edges"
    path.write_text(json.dumps(data))
    with pytest.raises(DatasetError):
        DatasetManifest.load(path)

    data["version"] = 99
    path.write_text(json.dumps(data))
    with pytest.raises(DatasetError):
        DatasetManifest.load(path)

    with pytest.raises(DatasetError):
        DatasetManifest.load(tmp_path / "absent.json")


def test_prediction_only_curve_csv(tmp_path):
    write_curve_csv(tmp_path / "p.csv", r_pred=[0.9, 0.4, 0.3])
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "i,r_pred"
    r_true, r_pred = read_curve_csv(tmp_path / "p.csv")
    assert r_true is None
    assert np.allclose(r_pred, [0.9, 0.4, 0.3])
    with pytest.raises(DatasetError):
        write_curve_csv(tmp_path / "none.csv")


def test_generation_failure_reports_instance_seed_once(tmp_path, monkeypatch):
    def refuse(config):
        raise GenerationError("no room for edges", seed=config.seed)

    monkeypatch.setattr("src.dataset.generate", refuse)
    recipe = DatasetRecipe(models=("ER",), size_range=(20, 24), count=1, repetitions=1)
    with pytest.raises(GenerationError) as excinfo:
        build_dataset(recipe, tmp_path / "data", workers=1)
    message = str(excinfo.value)
    assert message.startswith("train-00000: no room for edges")
    assert message.count("seed=") == 1
    assert excinfo.value.seed is not None
