"""Prediction error, Kruskal-Wallis significance and runtime benchmarking."""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import gammaincc
from scipy.stats import rankdata

from .config import DEFAULT_ALPHA
from .errors import ConfigError, ShapeError
from .robustness import RobustnessCurve
from .validator import SignificanceValidator, ValidationLevel

logger = logging.getLogger(__name__)

SIGN_BETTER = "+"
SIGN_WORSE = "-"
SIGN_SAME = "≈"

CurveLike = Union[RobustnessCurve, Sequence[float], np.ndarray]


def _values(curve: CurveLike) -> np.ndarray:
    if isinstance(curve, RobustnessCurve):
        return curve.values
    return np.asarray(curve, dtype=np.float64)


def prediction_error(v_true: CurveLike, v_pred: CurveLike) -> float:
    """
    ξ = mean absolute deviation between two curves of equal length.

    Raises:
        ValueError: lengths differ or the curves are empty
    """
    a, b = _values(v_true), _values(v_pred)
    if a.shape != b.shape:
        raise ShapeError(f"curve lengths differ: {a.shape[0]} vs {b.shape[0]}")
    if a.size == 0:
        raise ShapeError("cannot compare empty curves")
    return float(np.mean(np.abs(a - b)))


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> Tuple[float, float]:
    """
    Kruskal-Wallis H test with tie correction.

    Args:
        groups: At least two non-empty samples

    Returns:
        Tuple of (H, p); p from the chi-square survival function with k-1 degrees
        of freedom. When every value is identical H = 0 and p = 1.
    """
    samples = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(samples) < 2:
        raise ConfigError(f"need at least two groups, got {len(samples)}")
    if any(s.size == 0 for s in samples):
        raise ConfigError("every group must be non-empty")

    check = SignificanceValidator().validate_group_sizes([s.size for s in samples])
    if check.level is not ValidationLevel.SAFE:
        logger.warning(check.message)

    pooled = np.concatenate(samples)
    n = pooled.size
    ranks = rankdata(pooled)
    _, ties = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(ties.astype(np.float64) ** 3 - ties)) / (n ** 3 - n)
    if correction <= 0.0:
        return 0.0, 1.0

    total = 0.0
    start = 0
    for sample in samples:
        rank_sum = ranks[start:start + sample.size].sum()
        total += rank_sum * rank_sum / sample.size
        start += sample.size
    h = (12.0 / (n * (n + 1)) * total - 3.0 * (n + 1)) / correction
    h = max(h, 0.0)
    p = float(gammaincc((len(samples) - 1) / 2.0, h / 2.0))
    return float(h), p


@dataclass(frozen=True)
class SignificanceResult:
    h: float
    p: float
    sign: str


def significance_test(errors_a: Sequence[float], errors_b: Sequence[float], alpha: float = DEFAULT_ALPHA) -> SignificanceResult:
    """
    Compare two error samples; A plays the role of the proposed method.

    The sign is ≈ when p >= alpha, otherwise + if A's mean error is smaller and
    - if it is larger.
    """
    a = np.asarray(errors_a, dtype=np.float64)
    b = np.asarray(errors_b, dtype=np.float64)
    h, p = kruskal_wallis([a, b])
    if p >= alpha or a.mean() == b.mean():
        sign = SIGN_SAME
    elif a.mean() < b.mean():
        sign = SIGN_BETTER
    else:
        sign = SIGN_WORSE
    return SignificanceResult(h, p, sign)


def significance_sign(errors_a: Sequence[float], errors_b: Sequence[float], alpha: float = DEFAULT_ALPHA) -> str:
    return significance_test(errors_a, errors_b, alpha).sign


def bench_runtime(task: Callable[[], object], warmups: int = 1, repetitions: int = 5) -> Dict[str, float]:
    """
    Wall-clock timing of a closed task.

    Args:
        task: Callable taking no arguments
        warmups: Untimed runs first
        repetitions: Timed runs, at least one

    Returns:
        Dictionary with median, mean and min seconds
    """
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")
    for _ in range(max(warmups, 0)):
        task()
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        task()
        samples.append(time.perf_counter() - start)
    samples = np.asarray(samples)
    return {
        "median": float(np.median(samples)),
        "mean": float(np.mean(samples)),
        "min": float(np.min(samples)),
    }


REPORT_COLUMNS = ["instance_id", "model", "directed", "n", "measure", "method", "xi", "runtime"]
SUMMARY_KEYS = ["model", "measure", "directed", "method"]


@dataclass
class EvalReport:
    """Per-instance prediction errors and runtimes."""

    rows: List[dict] = field(default_factory=list)

    def add(
        self,
        instance_id: str,
        xi: float,
        model: str = "",
        directed: bool = False,
        n: int = 0,
        measure: str = "",
        method: str = "sppcnn",
        runtime: float = float("nan"),
    ):
        if xi < 0:
            raise ConfigError(f"prediction error must be >= 0, got {xi}")
        self.rows.append(
            {
                "instance_id": instance_id,
                "model": model,
                "directed": int(bool(directed)),
                "n": int(n),
                "measure": measure,
                "method": method,
                "xi": float(xi),
                "runtime": float(runtime),
            }
        )

    @property
    def errors(self) -> np.ndarray:
        return np.array([row["xi"] for row in self.rows], dtype=np.float64)

    @property
    def mean_error(self) -> float:
        if not self.rows:
            return float("nan")
        return float(np.mean(self.errors))

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS)

    def summary(self) -> pd.DataFrame:
        """Mean ξ, instance count and median runtime per (model, measure, directedness, method)."""
        frame = self.frame()
        if frame.empty:
            return pd.DataFrame(columns=SUMMARY_KEYS + ["mean_xi", "count", "median_runtime"])
        grouped = frame.groupby(SUMMARY_KEYS, sort=True)
        return grouped.agg(
            mean_xi=("xi", "mean"),
            count=("xi", "size"),
            median_runtime=("runtime", "median"),
        ).reset_index()

    def write(self, path: Union[str, Path], summary_path: Union[str, Path, None] = None):
        self.frame().to_csv(path, index=False, float_format="%.9g")
        if summary_path is not None:
            self.summary().to_csv(summary_path, index=False, float_format="%.9g")
