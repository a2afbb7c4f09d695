"""Utility functions shared across robnet modules."""

import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def derive_seed(base_seed: int, key: str) -> int:
    """
    Derive an independent 32-bit seed from a base seed and a string key.

    The result depends only on (base_seed, key), never on scheduling order.

    Args:
        base_seed: Recipe or command-line seed
        key: Stable identifier, e.g. an instance id

    Returns:
        Seed in [0, 2**32)
    """
    sequence = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFF, zlib.crc32(key.encode("utf-8"))])
    return int(sequence.generate_state(1)[0])


def child_seeds(rng: np.random.Generator, count: int) -> List[int]:
    """Draw ``count`` seeds for independent sub-tasks from ``rng``."""
    return [int(s) for s in rng.integers(0, 2**32, size=count, dtype=np.uint64)]


def run_tasks(func: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply ``func`` to every task, optionally across worker processes.

    Results come back in task order so output never depends on worker count.

    Args:
        func: Picklable top-level function
        tasks: Task arguments
        workers: Number of processes; 1 runs in-process

    Returns:
        List of results, one per task
    """
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def format_seconds(seconds: float) -> str:
    """
    Format a duration for display.

    Args:
        seconds: Duration in seconds

    Returns:
        Human-readable string in s, ms or µs
    """
    if seconds >= 1.0:
        return f"{seconds:.2f}s"
    if seconds >= 1e-3:
        return f"{seconds * 1e3:.2f}ms"
    return f"{seconds * 1e6:.1f}µs"


def format_ratio(part: float, whole: float) -> str:
    """Format ``part / whole`` as a percentage, guarding a zero denominator."""
    if whole == 0:
        return "n/a"
    return f"{part / whole * 100:.2f}%"
