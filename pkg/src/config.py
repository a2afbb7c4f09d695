"""Runtime configuration shared by the library and the CLI."""

import os

from .errors import ConfigError

WORKERS_ENV = "ROBNET_WORKERS"

# Ground-truth curves are averaged over this many attack sequences by default.
DEFAULT_REPETITIONS = 10

DEFAULT_ALPHA = 0.05


def worker_count(override=None) -> int:
    """
    Resolve the number of worker processes.

    Args:
        override: Explicit count (e.g. from a CLI flag); wins over the environment

    Returns:
        Worker count, at least 1
    """
    if override is not None:
        value = override
    else:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"worker count must be >= 1, got {value}")
    return value
