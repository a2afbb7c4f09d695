"""Resizing of curves and adjacency matrices.

Curves are resampled by linear interpolation so a fixed-length model output can
be compared with an N-point ground truth. Adjacency matrices are cut or padded
to a fixed W×W input for the fixed-input baseline.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ShapeError

logger = logging.getLogger(__name__)


def _interpolate(lower: np.ndarray, upper: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Linear interpolation between paired samples."""
    return lower + (upper - lower) * t


def resample_curve(values: Sequence[float], length: int) -> np.ndarray:
    """
    Resample a curve to ``length`` points on the normalized index t = i/(len-1).

    Args:
        values: Curve of at least two points
        length: Target length, at least two

    Returns:
        float64 array; the first and last values are kept exactly
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or len(values) < 2:
        raise ShapeError(f"cannot resample a curve of {values.size} point(s); need at least 2")
    if length < 2:
        raise ConfigError(f"target length must be >= 2, got {length}")
    if length == len(values):
        return values.copy()

    position = np.arange(length, dtype=np.float64) * (len(values) - 1) / (length - 1)
    left = np.minimum(np.floor(position).astype(np.int64), len(values) - 2)
    out = _interpolate(values[left], values[left + 1], position - left)
    out[0], out[-1] = values[0], values[-1]
    return out


class AdjacencyResizer:
    """Cuts or pads an adjacency matrix to a fixed width."""

    def __init__(self, width: int):
        if width < 1:
            raise ConfigError(f"resize width must be >= 1, got {width}")
        self.width = width

    def information_loss(self, n: int) -> float:
        """δ = |n - W| / n."""
        if n < 1:
            raise ShapeError("matrix must have at least one row")
        return abs(n - self.width) / n

    def resize(self, matrix: np.ndarray, rng: np.random.Generator) -> dict:
        """
        Resize ``matrix`` to W×W.

        Larger matrices lose n-W uniformly chosen indices (same set for rows and
        columns); smaller ones gain W-n zero rows/columns at uniform positions.

        Returns:
            Dictionary with the resized matrix and what was done to it
        """
        matrix = np.asarray(matrix)
        n = matrix.shape[0]
        if matrix.ndim != 2 or matrix.shape[1] != n:
            raise ShapeError(f"expected a square matrix, got shape {matrix.shape}")
        delta = self.information_loss(n)

        if n > self.width:
            keep = np.sort(rng.choice(n, size=self.width, replace=False))
            resized = matrix[np.ix_(keep, keep)]
            method = "delete"
        elif n < self.width:
            # positions of the original indices inside the W-wide output
            slots = np.sort(rng.choice(self.width, size=n, replace=False))
            resized = np.zeros((self.width, self.width), dtype=matrix.dtype)
            resized[np.ix_(slots, slots)] = matrix
            method = "insert"
        else:
            resized = matrix.copy()
            method = "identity"

        logger.debug("resized %d -> %d (%s), delta=%.4f", n, self.width, method, delta)
        return {
            "matrix": resized,
            "method": method,
            "original_size": n,
            "new_size": self.width,
            "changed_indices": abs(n - self.width),
            "delta": delta,
        }


def resize_adjacency(
    matrix: np.ndarray, width: int, rng: Optional[np.random.Generator] = None
) -> Tuple[np.ndarray, float]:
    """
    Fixed-input baseline: resize an n×n adjacency to width×width.

    Returns:
        Tuple of (resized matrix, δ information-loss ratio)
    """
    if rng is None:
        rng = np.random.default_rng()
    result = AdjacencyResizer(width).resize(matrix, rng)
    return result["matrix"], result["delta"]
