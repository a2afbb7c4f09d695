"""Tests for tensors, layers and reverse-mode differentiation."""

import math

import numpy as np
import pytest

from src.errors import AutodiffError, ShapeError
from src.tensor import (
    Parameter,
    Tape,
    Tensor,
    adaptive_max_pool,
    backward,
    bin_bounds,
    col2im,
    concat,
    conv2d,
    current_tape,
    dense,
    hard_sigmoid,
    im2col,
    mae_loss,
    maxpool2d,
    mse_loss,
    no_grad,
    relu,
    reshape,
    spp,
    use_tape,
)

F64 = np.float64


def spaced(rng, shape, step=0.01):
    """Distinct values at least ``step`` apart, so max locations are stable under small nudges."""
    values = np.arange(int(np.prod(shape)), dtype=F64) * step
    rng.shuffle(values)
    return values.reshape(shape) - values.mean()


def away_from(rng, shape, kinks, gap=0.1, low=-4.0, high=4.0):
    values = rng.uniform(low, high, size=shape)
    for kink in kinks:
        close = np.abs(values - kink) < gap
        values[close] = kink + np.where(values[close] >= kink, gap, -gap)
    return values


def weighted_sum(out, weights):
    """Scalar sum(out * weights) as a recorded [1, 1] dense product."""
    column = Tensor(np.asarray(weights, dtype=F64).reshape(-1, 1), dtype=F64)
    return dense(reshape(out, (1, -1)), column, Tensor(np.zeros(1), dtype=F64))


def check_gradients(build, inputs, seed=0, eps=1e-3, tolerance=1e-4):
    """Compare autodiff gradients of sum(build(*inputs) * R) against central differences."""
    rng = np.random.default_rng(seed)
    tensors = [Tensor(a, requires_grad=True, dtype=F64) for a in inputs]
    out = build(*tensors)
    weights = rng.standard_normal(out.shape)
    backward(weighted_sum(out, weights))

    def objective(arrays):
        with no_grad():
            value = build(*[Tensor(a, dtype=F64) for a in arrays])
        return float(np.sum(value.data * weights))

    for k, array in enumerate(inputs):
        numeric = np.zeros_like(array)
        for pos in np.ndindex(array.shape):
            plus = [a.copy() for a in inputs]
            minus = [a.copy() for a in inputs]
            plus[k][pos] += eps
            minus[k][pos] -= eps
            numeric[pos] = (objective(plus) - objective(minus)) / (2 * eps)
        analytic = tensors[k].grad
        assert analytic is not None
        error = np.linalg.norm(analytic - numeric) / (np.linalg.norm(analytic) + np.linalg.norm(numeric) + 1e-12)
        assert error < tolerance, f"input {k}: relative error {error}"


def naive_conv(x, kernel, bias, pad):
    batch, channels, height, width = x.shape
    out_channels, _, k, _ = kernel.shape
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out_h, out_w = height + 2 * pad - k + 1, width + 2 * pad - k + 1
    out = np.zeros((batch, out_channels, out_h, out_w))
    for b in range(batch):
        for o in range(out_channels):
            for i in range(out_h):
                for j in range(out_w):
                    out[b, o, i, j] = np.sum(padded[b, :, i:i + k, j:j + k] * kernel[o]) + bias[o]
    return out


def spp_oracle(feature_map, levels):
    """Bin (i, j) of an n×n grid covers rows floor(i·H/n) .. max(start+1, ceil((i+1)·H/n))."""
    channels, height, width = feature_map.shape
    values = []
    for n in levels:
        for c in range(channels):
            for i in range(n):
                r0 = math.floor(i * height / n)
                r1 = max(r0 + 1, math.ceil((i + 1) * height / n))
                for j in range(n):
                    c0 = math.floor(j * width / n)
                    c1 = max(c0 + 1, math.ceil((j + 1) * width / n))
                    values.append(feature_map[c, r0:r1, c0:c1].max())
    return np.array(values)


def test_tensor_rejects_five_dimensions():
    with pytest.raises(ShapeError):
        Tensor(np.zeros((1, 1, 1, 1, 1)))


def test_tensor_defaults_to_float32():
    assert Tensor([1.0, 2.0]).data.dtype == np.float32
    assert Parameter(np.zeros(3), name="w").requires_grad


def test_conv2d_matches_naive_cross_correlation():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2, 3, 7, 6))
    kernel = rng.standard_normal((4, 3, 3, 3))
    bias = rng.standard_normal(4)
    for padding, pad in (("same", 1), (0, 0), (2, 2)):
        with no_grad():
            out = conv2d(Tensor(x, dtype=F64), Tensor(kernel, dtype=F64), Tensor(bias, dtype=F64), padding)
        assert np.allclose(out.data, naive_conv(x, kernel, bias, pad))


def test_conv2d_same_keeps_spatial_size():
    x = Tensor(np.ones((1, 1, 5, 9)))
    out = conv2d(x, Tensor(np.ones((2, 1, 7, 7))), Tensor(np.zeros(2)), "same")
    assert out.shape == (1, 2, 5, 9)


def test_conv2d_shape_errors():
    x = Tensor(np.ones((1, 2, 5, 5)))
    with pytest.raises(ShapeError):
        conv2d(x, Tensor(np.ones((1, 3, 3, 3))), Tensor(np.zeros(1)))
    with pytest.raises(ShapeError):
        conv2d(x, Tensor(np.ones((1, 2, 4, 4))), Tensor(np.zeros(1)), "same")
    with pytest.raises(ShapeError):
        conv2d(x, Tensor(np.ones((1, 2, 7, 7))), Tensor(np.zeros(1)))


def test_im2col_and_col2im_are_adjoint():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 3, 5, 4))
    cols = im2col(x, 3, 1)
    other = rng.standard_normal(cols.shape)
    assert abs(np.sum(cols * other) - np.sum(x * col2im(other, x.shape, 3, 1))) < 1e-9


def test_maxpool_values_and_odd_sizes():
    x = np.arange(1 * 1 * 5 * 5, dtype=F64).reshape(1, 1, 5, 5)
    out = maxpool2d(Tensor(x, dtype=F64))
    assert out.shape == (1, 1, 2, 2)
    assert np.array_equal(out.data[0, 0], np.array([[6.0, 8.0], [16.0, 18.0]]))
    with pytest.raises(ShapeError):
        maxpool2d(Tensor(np.ones((1, 1, 1, 4))))


def test_bin_bounds_cover_every_cell_with_non_empty_bins():
    for length in range(1, 129):
        for bins in range(1, 9):
            bounds = bin_bounds(length, bins)
            covered = set()
            for start, end in bounds:
                assert 0 <= start < end <= length
                covered.update(range(start, end))
            assert covered == set(range(length))


def test_spp_length_is_independent_of_map_size():
    rng = np.random.default_rng(2)
    for height, width in ((1, 1), (2, 9), (5, 3), (16, 16), (33, 20)):
        out = spp(Tensor(rng.standard_normal((1, 3, height, width))), (1, 2, 4))
        assert out.shape == (1, 3 * 21)


def test_spp_matches_bin_max_oracle():
    rng = np.random.default_rng(3)
    for height, width in ((1, 1), (1, 7), (3, 5), (5, 3), (4, 4), (9, 13), (31, 2)):
        feature_map = rng.standard_normal((2, height, width))
        out = spp(Tensor(feature_map[None], dtype=F64), (1, 2, 4))
        assert np.array_equal(out.data[0], spp_oracle(feature_map, (1, 2, 4)))


@pytest.mark.slow
def test_spp_matches_oracle_for_all_sizes_up_to_128():
    rng = np.random.default_rng(4)
    for height in range(1, 129):
        for width in range(1, 129):
            feature_map = rng.standard_normal((1, height, width))
            with no_grad():
                out = spp(Tensor(feature_map[None], dtype=F64), (1, 2, 4))
            assert np.array_equal(out.data[0], spp_oracle(feature_map, (1, 2, 4)))


def test_adaptive_max_pool_rejects_zero_bins():
    with pytest.raises(ShapeError):
        adaptive_max_pool(Tensor(np.ones((1, 1, 2, 2))), 0)


def test_dense_and_activations():
    x = Tensor(np.array([[1.0, -2.0]]))
    w = Tensor(np.array([[1.0, 0.0, 2.0], [0.5, 1.0, 0.0]]))
    b = Tensor(np.array([0.0, 1.0, -1.0]))
    out = dense(x, w, b)
    assert np.allclose(out.data, [[0.0, -1.0, 1.0]])
    assert np.allclose(relu(out).data, [[0.0, 0.0, 1.0]])
    assert np.allclose(hard_sigmoid(Tensor(np.array([-5.0, 0.0, 1.0, 5.0]))).data, [0.0, 0.5, 0.7, 1.0])
    with pytest.raises(ShapeError):
        dense(x, Tensor(np.ones((3, 3))), Tensor(np.zeros(3)))


def test_losses():
    pred = Tensor(np.array([[0.5, 1.0]]))
    target = np.array([[0.0, 0.0]])
    assert abs(mse_loss(pred, target).item() - 0.625) < 1e-6
    assert abs(mae_loss(pred, target).item() - 0.75) < 1e-6
    with pytest.raises(ShapeError):
        mse_loss(pred, np.zeros((1, 3)))


def test_gradient_conv2d():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((1, 2, 5, 4))
    kernel = rng.standard_normal((3, 2, 3, 3))
    bias = rng.standard_normal(3)
    check_gradients(lambda a, k, b: conv2d(a, k, b, "same"), [x, kernel, bias])


def test_gradient_maxpool():
    rng = np.random.default_rng(6)
    check_gradients(maxpool2d, [spaced(rng, (1, 2, 5, 6))])


def test_gradient_spp():
    rng = np.random.default_rng(7)
    check_gradients(lambda a: spp(a, (1, 2, 4)), [spaced(rng, (1, 2, 5, 3))])


def test_gradient_dense_relu_hard_sigmoid():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((2, 4))
    w = rng.standard_normal((4, 3))
    b = rng.standard_normal(3)
    check_gradients(dense, [x, w, b])
    check_gradients(relu, [away_from(rng, (3, 4), kinks=(0.0,))])
    check_gradients(hard_sigmoid, [away_from(rng, (3, 4), kinks=(-2.5, 2.5))])


def test_gradient_losses():
    rng = np.random.default_rng(9)
    target = rng.uniform(0, 1, size=(1, 6))
    check_gradients(lambda p: mse_loss(p, Tensor(target, dtype=F64)), [rng.uniform(0, 1, size=(1, 6))])
    pred = target + away_from(rng, (1, 6), kinks=(0.0,), low=-0.5, high=0.5)
    check_gradients(lambda p: mae_loss(p, Tensor(target, dtype=F64)), [pred])


def test_gradient_reshape_and_concat():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((1, 2, 3))
    b = rng.standard_normal((1, 4))
    check_gradients(lambda x, y: concat([reshape(x, (1, 6)), y], axis=1), [a, b])


def test_gradients_accumulate_until_zeroed():
    w = Parameter(np.array([2.0]), dtype=F64)
    for _ in range(2):
        backward(weighted_sum(w, [3.0]))
    assert np.allclose(w.grad, [6.0])
    w.zero_grad()
    assert w.grad is None


def test_no_grad_records_nothing():
    tape = Tape()
    w = Parameter(np.ones((1, 2)))
    with use_tape(tape):
        with no_grad():
            relu(w)
        assert len(tape) == 0
        relu(w)
        assert len(tape) == 1


def test_backward_errors():
    w = Parameter(np.ones(3))
    with pytest.raises(AutodiffError):
        backward(relu(w))
    loss = weighted_sum(relu(w), np.ones(3))
    backward(loss)
    assert len(current_tape()) == 0
    with pytest.raises(AutodiffError):
        backward(loss)


def test_untracked_inputs_get_no_gradient():
    x = Tensor(np.ones((1, 1, 3, 3)))
    kernel = Parameter(np.ones((1, 1, 3, 3)))
    bias = Parameter(np.zeros(1))
    backward(weighted_sum(conv2d(x, kernel, bias, "same"), np.ones(9)))
    assert x.grad is None
    assert kernel.grad is not None
    assert abs(float(bias.grad[0]) - 9.0) < 1e-6
