"""Training the SPP-CNN on (adjacency matrix, robustness curve) pairs.

Graphs have different sizes, so every sample gets its own forward pass and
gradients are accumulated over ``accumulation`` samples before an Adam step.
"""

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DatasetError, TrainingDivergedError
from .graph import Graph
from .model import ModelCheckpoint, SPPNet, predict_matrix
from .resizer import resample_curve, resize_adjacency
from .robustness import Measure, RobustnessCurve
from .stats import prediction_error
from .tensor import Parameter, Tape, backward, mae_loss, mse_loss, no_grad, use_tape

logger = logging.getLogger(__name__)

TrainingPair = Tuple[Graph, RobustnessCurve]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # samples whose gradients are summed per optimizer step
    accumulation: int = 8
    seed: int = 0
    # epochs without a better validation ξ before stopping; None trains all epochs
    patience: Optional[int] = None
    validation_fraction: float = 0.1
    # feed W×W resized adjacency matrices (fixed-input baseline)
    resize: Optional[int] = None

    def validate(self):
        if self.accumulation < 1:
            raise ConfigError(f"accumulation must be >= 1, got {self.accumulation}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigError(f"validation fraction must be in [0, 1), got {self.validation_fraction}")
        if self.patience is not None and self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.resize is not None and self.resize < 1:
            raise ConfigError(f"resize width must be >= 1, got {self.resize}")


class Adam:
    """Adam with bias correction, updating parameters in place."""

    def __init__(self, params: Sequence[Parameter], lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self, scale: float = 1.0):
        """Apply one update from the accumulated ``grad`` times ``scale``."""
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            g = p.grad * scale
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            p.data -= update.astype(p.data.dtype)


@dataclass
class LossHistory:
    train_mse: List[float] = field(default_factory=list)
    train_mae: List[float] = field(default_factory=list)
    val_xi: List[float] = field(default_factory=list)
    # MSE of every optimizer step, in order
    step_loss: List[float] = field(default_factory=list)


@dataclass
class TrainResult:
    checkpoint: ModelCheckpoint
    history: LossHistory


def dataset_fingerprint(dataset: Sequence[TrainingPair]) -> str:
    digest = hashlib.sha256()
    for graph, curve in dataset:
        digest.update(f"{graph.n_alive}:{int(graph.directed)}:".encode())
        digest.update(np.asarray(graph.edges(), dtype=np.int64).tobytes())
        digest.update(curve.values.tobytes())
    return digest.hexdigest()[:16]


@dataclass
class _Sample:
    matrix: np.ndarray
    target: np.ndarray
    truth: np.ndarray


def _prepare(dataset: Sequence[TrainingPair], model: SPPNet, config: TrainConfig, rng: np.random.Generator) -> List[_Sample]:
    samples = []
    minimum = model.config.min_size
    for index, (graph, curve) in enumerate(dataset):
        if len(curve) != graph.n_alive:
            raise DatasetError(f"sample {index}: curve has {len(curve)} points but the graph has {graph.n_alive} nodes")
        matrix = graph.adjacency_matrix(dtype=np.float32)
        if config.resize is not None:
            matrix, _ = resize_adjacency(matrix, config.resize, rng)
        if matrix.shape[0] < minimum:
            raise DatasetError(f"sample {index}: input size {matrix.shape[0]} is below the model minimum {minimum}")
        target = resample_curve(curve.values, model.config.output_len).astype(np.float32)[None, :]
        samples.append(_Sample(matrix, target, curve.values))
    return samples


def _split(count: int, fraction: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(count)
    held_out = int(round(count * fraction))
    if held_out == 0 or held_out == count:
        return order, order
    return order[held_out:], order[:held_out]


def evaluate(model: SPPNet, samples: Sequence[_Sample]) -> float:
    """Mean ξ between resampled predictions and the N-point ground truth."""
    errors = [prediction_error(s.truth, predict_matrix(model, s.matrix, len(s.truth))) for s in samples]
    return float(np.mean(errors))


def train(model: SPPNet, dataset: Sequence[TrainingPair], config: TrainConfig = TrainConfig()) -> TrainResult:
    """
    Train ``model`` in place and return the best checkpoint by validation ξ.

    Deterministic given ``config.seed`` and the dataset order.

    Raises:
        DatasetError: empty dataset or a graph below the model's minimum size
        TrainingDivergedError: the loss became NaN or infinite
    """
    config.validate()
    if not dataset:
        raise DatasetError("training dataset is empty")

    rng = np.random.default_rng(config.seed)
    samples = _prepare(dataset, model, config, rng)
    train_idx, val_idx = _split(len(samples), config.validation_fraction, rng)
    validation = [samples[i] for i in val_idx]
    logger.info("training on %d samples, validating on %d", len(train_idx), len(validation))

    optimizer = Adam(model.parameters(), config.lr, config.beta1, config.beta2, config.eps)
    history = LossHistory()
    best_state = model.state()
    best_xi = evaluate(model, validation)
    best_epoch = 0
    stale = 0
    step = 0
    epochs_run = 0

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(train_idx)
        epoch_mse, epoch_mae = [], []
        for start in range(0, len(order), config.accumulation):
            chunk = order[start:start + config.accumulation]
            model.zero_grad()
            chunk_loss = 0.0
            # a fresh tape per chunk; nothing recorded survives a divergence
            with use_tape(Tape()):
                for i in chunk:
                    sample = samples[i]
                    prediction = model.forward_matrix(sample.matrix)
                    loss = mse_loss(prediction, sample.target)
                    value = loss.item()
                    if not np.isfinite(value):
                        raise TrainingDivergedError(step, value)
                    backward(loss)
                    with no_grad():
                        epoch_mae.append(mae_loss(prediction, sample.target).item())
                    chunk_loss += value
                    epoch_mse.append(value)
            optimizer.step(scale=1.0 / len(chunk))
            history.step_loss.append(chunk_loss / len(chunk))
            step += 1

        epochs_run = epoch
        val_xi = evaluate(model, validation)
        history.train_mse.append(float(np.mean(epoch_mse)))
        history.train_mae.append(float(np.mean(epoch_mae)))
        history.val_xi.append(val_xi)
        logger.info(
            "epoch %d: mse=%.6f mae=%.6f val_xi=%.6f",
            epoch, history.train_mse[-1], history.train_mae[-1], val_xi,
        )

        if val_xi < best_xi:
            best_xi, best_epoch, best_state, stale = val_xi, epoch, model.state(), 0
        else:
            stale += 1
            if config.patience is not None and stale >= config.patience:
                logger.info("early stop after epoch %d; best epoch %d", epoch, best_epoch)
                break

    model.load_state(best_state)
    measure = dataset[0][1].measure
    model.measure = Measure(measure)
    metadata = {
        "epochs_run": epochs_run,
        "best_epoch": best_epoch,
        "best_val_xi": best_xi,
        "final_train_mse": history.train_mse[-1] if history.train_mse else None,
        "final_train_mae": history.train_mae[-1] if history.train_mae else None,
        "dataset_fingerprint": dataset_fingerprint(dataset),
        "dataset_size": len(dataset),
        "measure": model.measure.value,
        "directed": bool(dataset[0][0].directed),
        "train_config": asdict(config),
    }
    return TrainResult(model.checkpoint(metadata), history)
