"""Domain errors for robnet.

Every error subclasses ``ValueError`` and carries a short ``code`` used by the
CLI to print a single machine-parsable line.
"""

from typing import Optional


class RobnetError(ValueError):
    """Base class for all robnet domain errors."""

    code = "robnet"


class GraphError(RobnetError):
    code = "graph"


class GenerationError(RobnetError):
    code = "generation"

    def __init__(self, message: str, seed: Optional[int] = None):
        self.reason = message
        self.seed = seed
        if seed is not None:
            message = f"{message} (seed={seed})"
        super().__init__(message)


class ConfigError(RobnetError):
    code = "config"


class ShapeError(RobnetError):
    code = "shape"


class AutodiffError(RobnetError):
    code = "autodiff"


class TrainingDivergedError(RobnetError):
    code = "diverged"

    def __init__(self, step: int, loss: float):
        super().__init__(f"loss became {loss} at step {step}")
        self.step = step
        self.loss = loss


class CheckpointError(RobnetError):
    code = "checkpoint"


class CorruptCheckpointError(CheckpointError):
    code = "corrupt"


class CheckpointVersionError(CheckpointError):
    code = "version"


class EdgeListError(RobnetError):
    code = "edgelist"

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DatasetError(RobnetError):
    code = "dataset"
