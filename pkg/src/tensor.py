"""Dense tensors with tape-based reverse-mode differentiation.

Only the operators the SPP-CNN needs are provided. Every operator whose inputs
depend on a parameter appends a record to the current thread's tape; ``backward``
replays the tape in reverse and clears it.

Tensors are 32-bit by default. Operators keep whatever float dtype they are given,
which lets gradient checks run in 64-bit.
"""

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import AutodiffError, ShapeError

DTYPE = np.float32

ArrayLike = Union[np.ndarray, float, Sequence]


class Tensor:
    """A dense array of up to four dimensions (batch, channels, height, width)."""

    def __init__(self, data: ArrayLike, requires_grad: bool = False, dtype=DTYPE, name: Optional[str] = None):
        array = np.asarray(data, dtype=dtype)
        if array.ndim > 4:
            raise ShapeError(f"tensors have at most 4 dimensions, got shape {array.shape}")
        self.data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        # leaves are created by the user; everything else comes out of an operator
        self.is_leaf = True
        self.tracked = requires_grad

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """A trainable tensor."""

    def __init__(self, data: ArrayLike, name: Optional[str] = None, dtype=DTYPE):
        super().__init__(data, requires_grad=True, dtype=dtype, name=name)


@dataclass
class TapeRecord:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    # maps the output gradient to one gradient (or None) per input
    backward: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tape:
    """Ordered record of the operations of one forward pass."""

    def __init__(self):
        self.records: List[TapeRecord] = []

    def __len__(self):
        return len(self.records)

    def record(self, record: TapeRecord):
        self.records.append(record)

    def clear(self):
        self.records.clear()


_state = threading.local()


def current_tape() -> Tape:
    tape = getattr(_state, "tape", None)
    if tape is None:
        tape = _state.tape = Tape()
    return tape


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    """Run operators without recording them."""
    previous = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextmanager
def use_tape(tape: Tape):
    """Record onto ``tape`` instead of the thread's default tape."""
    previous = getattr(_state, "tape", None)
    _state.tape = tape
    try:
        yield tape
    finally:
        _state.tape = previous


def _as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _emit(op: str, data: np.ndarray, inputs: Tuple[Tensor, ...], backward: Callable) -> Tensor:
    out = Tensor(data, dtype=data.dtype)
    out.is_leaf = False
    if grad_enabled() and any(t.tracked for t in inputs):
        out.tracked = True
        current_tape().record(TapeRecord(op, inputs, out, backward))
    return out


def backward(loss: Tensor):
    """
    Populate ``grad`` on every parameter the scalar ``loss`` depends on.

    Gradients accumulate into ``grad`` (call ``zero_grad`` between steps); the
    tape is cleared afterwards, so a second call needs a new forward pass.
    """
    if loss.data.size != 1:
        raise AutodiffError(f"backward needs a scalar loss, got shape {loss.shape}")
    tape = current_tape()
    position = None
    for i in range(len(tape.records) - 1, -1, -1):
        if tape.records[i].output is loss:
            position = i
            break
    if position is None:
        raise AutodiffError("loss is not on the tape; backward was already called or the forward pass was not recorded")

    grads = {id(loss): np.ones_like(loss.data)}
    for record in reversed(tape.records[: position + 1]):
        upstream = grads.pop(id(record.output), None)
        if upstream is None:
            continue
        for tensor, grad in zip(record.inputs, record.backward(upstream)):
            if grad is None or not tensor.tracked:
                continue
            if tensor.is_leaf:
                grad = grad.astype(tensor.data.dtype, copy=False)
                tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
            else:
                key = id(tensor)
                grads[key] = grad if key not in grads else grads[key] + grad
    tape.clear()


# ---- shape operators -----------------------------------------------------


def reshape(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    original = x.shape

    def grad_fn(g):
        return (g.reshape(original),)

    return _emit("reshape", x.data.reshape(shape), (x,), grad_fn)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    tensors = tuple(tensors)
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def grad_fn(g):
        return tuple(np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(tensors)))

    return _emit("concat", np.concatenate([t.data for t in tensors], axis=axis), tensors, grad_fn)


# ---- layers --------------------------------------------------------------


def _padding(kernel: int, padding: Union[int, str]) -> int:
    if padding == "same":
        if kernel % 2 == 0:
            raise ShapeError(f"'same' padding needs an odd kernel, got {kernel}")
        return (kernel - 1) // 2
    return int(padding)


def im2col(x: np.ndarray, kernel: int, pad: int) -> np.ndarray:
    """(B, C, H, W) -> (B·H'·W', C·k·k) patch matrix, stride 1."""
    batch, channels, _, _ = x.shape
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, (kernel, kernel), axis=(2, 3))
    out_h, out_w = windows.shape[2], windows.shape[3]
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(batch * out_h * out_w, channels * kernel * kernel)


def col2im(cols: np.ndarray, shape: Tuple[int, int, int, int], kernel: int, pad: int) -> np.ndarray:
    """Adjoint of ``im2col``: scatter-add patch gradients back onto the input."""
    batch, channels, height, width = shape
    out_h = height + 2 * pad - kernel + 1
    out_w = width + 2 * pad - kernel + 1
    patches = cols.reshape(batch, out_h, out_w, channels, kernel, kernel)
    padded = np.zeros((batch, channels, height + 2 * pad, width + 2 * pad), dtype=cols.dtype)
    for i in range(kernel):
        for j in range(kernel):
            padded[:, :, i:i + out_h, j:j + out_w] += patches[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    return padded[:, :, pad:pad + height, pad:pad + width]


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor, padding: Union[int, str] = 0) -> Tensor:
    """
    Stride-1 cross-correlation plus per-channel bias.

    Args:
        x: Input [B, Cin, H, W]
        kernel: Weights [Cout, Cin, k, k]
        bias: Bias [Cout]
        padding: Symmetric zero padding, an int or "same"

    Returns:
        Output [B, Cout, H', W']
    """
    if x.data.ndim != 4 or kernel.data.ndim != 4:
        raise ShapeError(f"conv2d needs 4-D input and kernel, got {x.shape} and {kernel.shape}")
    batch, channels, height, width = x.shape
    out_channels, in_channels, k, k2 = kernel.shape
    if k != k2:
        raise ShapeError(f"kernel must be square, got {k}x{k2}")
    if in_channels != channels:
        raise ShapeError(f"channel mismatch: input has {channels}, kernel expects {in_channels}")
    if bias.shape != (out_channels,):
        raise ShapeError(f"bias shape {bias.shape} does not match {out_channels} output channels")
    pad = _padding(k, padding)
    out_h, out_w = height + 2 * pad - k + 1, width + 2 * pad - k + 1
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"input {height}x{width} is smaller than kernel {k}x{k} after padding {pad}")

    cols = im2col(x.data, k, pad)
    weights = kernel.data.reshape(out_channels, -1)
    out = cols @ weights.T + bias.data
    out = out.reshape(batch, out_h, out_w, out_channels).transpose(0, 3, 1, 2)

    def grad_fn(g):
        flat = g.transpose(0, 2, 3, 1).reshape(-1, out_channels)
        grad_bias = flat.sum(axis=0)
        grad_kernel = (flat.T @ cols).reshape(kernel.shape)
        grad_x = col2im(flat @ weights, x.shape, k, pad) if x.tracked else None
        return (grad_x, grad_kernel, grad_bias)

    return _emit("conv2d", np.ascontiguousarray(out), (x, kernel, bias), grad_fn)


def maxpool2d(x: Tensor, size: int = 2) -> Tensor:
    """
    Non-overlapping ``size``×``size`` max pooling with stride ``size``.

    Trailing rows/columns that do not fill a window are dropped. The gradient
    goes to the first maximum of each window in row-major order.
    """
    if x.data.ndim != 4:
        raise ShapeError(f"maxpool2d needs a 4-D input, got {x.shape}")
    batch, channels, height, width = x.shape
    if height < size or width < size:
        raise ShapeError(f"input {height}x{width} is smaller than the {size}x{size} pool")
    out_h, out_w = height // size, width // size
    cropped = x.data[:, :, : out_h * size, : out_w * size]
    windows = (
        cropped.reshape(batch, channels, out_h, size, out_w, size)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, out_h, out_w, size * size)
    )
    argmax = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, argmax[..., None], axis=-1)[..., 0]

    def grad_fn(g):
        routed = np.zeros_like(windows)
        np.put_along_axis(routed, argmax[..., None], g[..., None], axis=-1)
        routed = (
            routed.reshape(batch, channels, out_h, out_w, size, size)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(batch, channels, out_h * size, out_w * size)
        )
        grad_x = np.zeros_like(x.data)
        grad_x[:, :, : out_h * size, : out_w * size] = routed
        return (grad_x,)

    return _emit("maxpool2d", out, (x,), grad_fn)


def bin_bounds(length: int, bins: int) -> List[Tuple[int, int]]:
    """Bin i covers [floor(i·L/n), max(floor(i·L/n)+1, ceil((i+1)·L/n)))."""
    bounds = []
    for i in range(bins):
        start = (i * length) // bins
        end = max(start + 1, -((-(i + 1) * length) // bins))
        bounds.append((start, min(end, length)))
    return bounds


def adaptive_max_pool(x: Tensor, bins: int) -> Tensor:
    """Max over an ``bins``×``bins`` grid of non-empty regions covering the map."""
    if x.data.ndim != 4:
        raise ShapeError(f"adaptive_max_pool needs a 4-D input, got {x.shape}")
    if bins < 1:
        raise ShapeError(f"bins must be >= 1, got {bins}")
    batch, channels, height, width = x.shape
    if height < 1 or width < 1:
        raise ShapeError("adaptive_max_pool needs a non-empty map")
    rows, cols = bin_bounds(height, bins), bin_bounds(width, bins)
    out = np.empty((batch, channels, bins, bins), dtype=x.data.dtype)
    picks = {}
    for i, (r0, r1) in enumerate(rows):
        for j, (c0, c1) in enumerate(cols):
            region = x.data[:, :, r0:r1, c0:c1].reshape(batch, channels, -1)
            idx = region.argmax(axis=-1)
            out[:, :, i, j] = np.take_along_axis(region, idx[..., None], axis=-1)[..., 0]
            picks[i, j] = idx

    def grad_fn(g):
        grad_x = np.zeros_like(x.data)
        for i, (r0, r1) in enumerate(rows):
            for j, (c0, c1) in enumerate(cols):
                routed = np.zeros((batch, channels, (r1 - r0) * (c1 - c0)), dtype=g.dtype)
                np.put_along_axis(routed, picks[i, j][..., None], g[:, :, i, j][..., None], axis=-1)
                grad_x[:, :, r0:r1, c0:c1] += routed.reshape(batch, channels, r1 - r0, c1 - c0)
        return (grad_x,)

    return _emit("adaptive_max_pool", out, (x,), grad_fn)


def spp(x: Tensor, levels: Sequence[int] = (1, 2, 4)) -> Tensor:
    """
    Spatial pyramid pooling: [B, L, H, W] -> [B, p·L], p = Σ level².

    Layout is level-major, then channel, then row-major bin; the length does not
    depend on H or W.
    """
    batch, channels = x.shape[0], x.shape[1]
    pooled = [reshape(adaptive_max_pool(x, n), (batch, channels * n * n)) for n in levels]
    return concat(pooled, axis=1)


def dense(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map [B, F] @ [F, G] + [G]."""
    if x.data.ndim != 2 or weight.data.ndim != 2:
        raise ShapeError(f"dense needs 2-D input and weight, got {x.shape} and {weight.shape}")
    if x.shape[1] != weight.shape[0]:
        raise ShapeError(f"dense input width {x.shape[1]} does not match weight {weight.shape}")
    if bias.shape != (weight.shape[1],):
        raise ShapeError(f"bias shape {bias.shape} does not match output width {weight.shape[1]}")

    def grad_fn(g):
        return (g @ weight.data.T, x.data.T @ g, g.sum(axis=0))

    return _emit("dense", x.data @ weight.data + bias.data, (x, weight, bias), grad_fn)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def grad_fn(g):
        return (g * mask,)

    return _emit("relu", np.where(mask, x.data, 0).astype(x.data.dtype), (x,), grad_fn)


def hard_sigmoid(x: Tensor) -> Tensor:
    """clamp(0.2·x + 0.5, 0, 1)."""
    linear = (x.data > -2.5) & (x.data < 2.5)
    out = np.clip(0.2 * x.data + 0.5, 0.0, 1.0).astype(x.data.dtype)

    def grad_fn(g):
        return ((0.2 * g * linear).astype(g.dtype),)

    return _emit("hard_sigmoid", out, (x,), grad_fn)


def _loss_inputs(pred: Tensor, target) -> Tuple[Tensor, Tensor]:
    target = _as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"loss shape mismatch: prediction {pred.shape} vs target {target.shape}")
    return pred, target


def mse_loss(pred: Tensor, target) -> Tensor:
    """Mean over all elements of the squared difference."""
    pred, target = _loss_inputs(pred, target)
    diff = pred.data.astype(np.float64) - target.data.astype(np.float64)
    value = np.asarray(np.mean(diff * diff), dtype=pred.data.dtype)

    def grad_fn(g):
        grad = (2.0 * diff / diff.size * float(g)).astype(pred.data.dtype)
        return (grad, -grad)

    return _emit("mse_loss", value, (pred, target), grad_fn)


def mae_loss(pred: Tensor, target) -> Tensor:
    """Mean over all elements of the absolute difference."""
    pred, target = _loss_inputs(pred, target)
    diff = pred.data.astype(np.float64) - target.data.astype(np.float64)
    value = np.asarray(np.mean(np.abs(diff)), dtype=pred.data.dtype)

    def grad_fn(g):
        grad = (np.sign(diff) / diff.size * float(g)).astype(pred.data.dtype)
        return (grad, -grad)

    return _emit("mae_loss", value, (pred, target), grad_fn)
