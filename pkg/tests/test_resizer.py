"""Tests for the curve and adjacency resizer module."""

import numpy as np
import pytest

from src.resizer import AdjacencyResizer, resample_curve, resize_adjacency


def test_resample_keeps_endpoints():
    """The first and last values survive any resampling exactly."""
    curve = np.array([1.0, 0.7, 0.2, 0.05])
    for length in (2, 3, 7, 100):
        out = resample_curve(curve, length)
        assert len(out) == length
        assert out[0] == 1.0
        assert out[-1] == 0.05


def test_resample_is_linear_interpolation():
    out = resample_curve([0.0, 1.0], 5)
    assert np.allclose(out, [0.0, 0.25, 0.5, 0.75, 1.0])

    down = resample_curve([0.0, 0.5, 1.0, 0.5, 0.0], 3)
    assert np.allclose(down, [0.0, 1.0, 0.0])


def test_resample_same_length_is_a_copy():
    curve = np.array([1.0, 0.5, 0.25])
    out = resample_curve(curve, 3)
    assert np.array_equal(out, curve)
    out[0] = 0.0
    assert curve[0] == 1.0


def test_resample_preserves_linear_curves():
    curve = np.linspace(1.0, 0.1, 37)
    assert np.allclose(resample_curve(curve, 256), np.linspace(1.0, 0.1, 256))


def test_resample_rejects_short_inputs():
    with pytest.raises(ValueError):
        resample_curve([1.0], 5)
    with pytest.raises(ValueError):
        resample_curve([1.0, 0.5], 1)


def test_information_loss():
    resizer = AdjacencyResizer(100)
    assert abs(resizer.information_loss(200) - 0.5) < 1e-12
    assert abs(resizer.information_loss(80) - 0.25) < 1e-12
    assert resizer.information_loss(100) == 0.0
    with pytest.raises(ValueError):
        AdjacencyResizer(0)


def test_resize_deletes_matching_rows_and_columns():
    """Shrinking keeps a principal submatrix."""
    n = 12
    matrix = np.arange(n * n).reshape(n, n)
    result = AdjacencyResizer(5).resize(matrix, np.random.default_rng(0))

    assert result["method"] == "delete"
    assert result["matrix"].shape == (5, 5)
    assert result["changed_indices"] == 7
    kept_rows = result["matrix"][:, 0] // n
    kept_cols = result["matrix"][0, :] % n
    assert np.array_equal(kept_rows, kept_cols)
    assert np.all(np.diff(kept_rows) > 0)


def test_resize_inserts_zero_rows_and_columns():
    matrix = np.ones((3, 3), dtype=np.uint8) - np.eye(3, dtype=np.uint8)
    result = AdjacencyResizer(8).resize(matrix, np.random.default_rng(1))

    assert result["method"] == "insert"
    resized = result["matrix"]
    assert resized.shape == (8, 8)
    assert resized.sum() == matrix.sum()
    assert np.array_equal(resized, resized.T)
    assert abs(result["delta"] - 5 / 3) < 1e-12


def test_resize_identity_and_errors():
    matrix = np.eye(4)
    matrix_out, delta = resize_adjacency(matrix, 4, np.random.default_rng(0))
    assert np.array_equal(matrix_out, matrix)
    assert delta == 0.0
    with pytest.raises(ValueError):
        AdjacencyResizer(3).resize(np.zeros((2, 3)), np.random.default_rng(0))


def test_resize_is_deterministic_per_rng():
    rng_matrix = (np.random.default_rng(2).random((20, 20)) < 0.3).astype(np.uint8)
    a, _ = resize_adjacency(rng_matrix, 9, np.random.default_rng(5))
    b, _ = resize_adjacency(rng_matrix, 9, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_information_loss_reference_cases():
    for n, width, expected in ((1300, 1000, 300 / 1300), (500, 1000, 1.0), (1000, 1000, 0.0)):
        _, delta = resize_adjacency(np.zeros((n, n), dtype=np.uint8), width, np.random.default_rng(0))
        assert delta == expected
