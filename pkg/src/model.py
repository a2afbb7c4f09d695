"""SPP-CNN: convolution groups, a spatial pyramid pooling layer and a dense head.

The adjacency matrix of a graph is fed as a one-channel N×N image with no
resizing. Each convolution group is a "same"-padded convolution, ReLU and a
2×2/stride-2 max pool; the pyramid turns the final L feature maps into a p·L
vector whatever N is, and three dense layers (ReLU, ReLU, hard-sigmoid) emit
a fixed-length curve of M points.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, ShapeError
from .graph import Graph
from .resizer import resample_curve, resize_adjacency
from .robustness import Measure, RobustnessCurve
from .tensor import (
    Parameter,
    Tensor,
    conv2d,
    dense,
    hard_sigmoid,
    maxpool2d,
    no_grad,
    relu,
    spp,
)

logger = logging.getLogger(__name__)

# Floor applied to predicted curves so they stay inside (0, 1].
PREDICTION_FLOOR = 1e-6


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of an SPP-CNN."""

    # (kernel size, output channels) per convolution group
    conv_groups: Tuple[Tuple[int, int], ...] = ((7, 64), (5, 64), (3, 128), (3, 128), (3, 256), (3, 256))
    spp_levels: Tuple[int, ...] = (1, 2, 4)
    # dense widths from the pyramid output to the curve length M
    fc_widths: Tuple[int, ...] = (5376, 1024, 1024, 256)
    name: str = "default"

    @classmethod
    def default(cls, output_len: int = 256) -> "ModelConfig":
        return cls(fc_widths=(5376, 1024, 1024, output_len))

    @classmethod
    def reduced(cls, output_len: int = 128) -> "ModelConfig":
        """Four groups, L=64, p·L=1344; handles graphs down to 16 nodes."""
        return cls(
            conv_groups=((7, 16), (5, 16), (3, 32), (3, 64)),
            fc_widths=(1344, 256, 256, output_len),
            name="reduced",
        )

    @classmethod
    def preset(cls, name: str, output_len: Optional[int] = None) -> "ModelConfig":
        if name == "default":
            return cls.default(output_len or 256)
        if name == "reduced":
            return cls.reduced(output_len or 128)
        raise ConfigError(f"unknown model preset {name!r}; expected 'default' or 'reduced'")

    @property
    def bins(self) -> int:
        """p, the total number of pyramid bins."""
        return sum(level * level for level in self.spp_levels)

    @property
    def channels(self) -> int:
        """L, the number of filters in the last convolution."""
        return self.conv_groups[-1][1]

    @property
    def output_len(self) -> int:
        return self.fc_widths[-1]

    @property
    def min_size(self) -> int:
        """Smallest N whose final feature map is still at least 1×1."""
        return 2 ** len(self.conv_groups)

    def validate(self):
        if not self.conv_groups:
            raise ConfigError("at least one convolution group is required")
        for kernel, channels in self.conv_groups:
            if kernel < 1 or kernel % 2 == 0 or channels < 1:
                raise ConfigError(f"invalid convolution group ({kernel}, {channels}); kernels must be odd")
        if not self.spp_levels or min(self.spp_levels) < 1:
            raise ConfigError(f"invalid pyramid levels {self.spp_levels}")
        if len(self.fc_widths) < 2 or min(self.fc_widths) < 1:
            raise ConfigError(f"invalid dense widths {self.fc_widths}")
        if self.fc_widths[0] != self.bins * self.channels:
            raise ConfigError(
                f"first dense layer expects {self.fc_widths[0]} inputs but the pyramid emits "
                f"{self.bins}·{self.channels} = {self.bins * self.channels}"
            )
        if self.output_len < 2:
            raise ConfigError(f"output curve length must be >= 2, got {self.output_len}")

    def to_dict(self) -> dict:
        return {
            "conv_groups": [list(g) for g in self.conv_groups],
            "spp_levels": list(self.spp_levels),
            "fc_widths": list(self.fc_widths),
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(
            conv_groups=tuple((int(k), int(c)) for k, c in data["conv_groups"]),
            spp_levels=tuple(int(level) for level in data["spp_levels"]),
            fc_widths=tuple(int(w) for w in data["fc_widths"]),
            name=data.get("name", "custom"),
        )


@dataclass
class ModelCheckpoint:
    """Architecture, trained parameters and training metadata."""

    config: ModelConfig
    params: Dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def measure(self) -> Measure:
        return Measure(self.metadata.get("measure", Measure.CONNECTIVITY.value))


class SPPNet:
    """An SPP-CNN and its parameters."""

    def __init__(self, config: ModelConfig, params: Dict[str, Parameter], measure: Measure = Measure.CONNECTIVITY):
        config.validate()
        self.config = config
        self.params = params
        # robustness measure the network was trained to predict
        self.measure = Measure(measure)

    def parameters(self) -> List[Parameter]:
        return list(self.params.values())

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def state(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state(self, state: Dict[str, np.ndarray]):
        if list(state) != list(self.params):
            raise ConfigError("parameter names do not match the model")
        for name, value in state.items():
            if value.shape != self.params[name].shape:
                raise ShapeError(f"parameter {name} has shape {value.shape}, expected {self.params[name].shape}")
            self.params[name].data = np.array(value, dtype=self.params[name].data.dtype)

    def checkpoint(self, metadata: Optional[dict] = None) -> ModelCheckpoint:
        return ModelCheckpoint(self.config, self.state(), dict(metadata or {}))

    def forward_matrix(self, matrix: Union[np.ndarray, Tensor]) -> Tensor:
        """Run the network on one N×N matrix; returns a [1, M] tensor."""
        image = matrix if isinstance(matrix, Tensor) else Tensor(np.asarray(matrix)[None, None])
        size = min(image.shape[-2:])
        if size < self.config.min_size:
            raise ShapeError(
                f"input of size {size} is below the minimum {self.config.min_size} for the {self.config.name} model"
            )
        x = image
        for i in range(len(self.config.conv_groups)):
            x = conv2d(x, self.params[f"conv{i}.weight"], self.params[f"conv{i}.bias"], padding="same")
            x = maxpool2d(relu(x), 2)
        x = spp(x, self.config.spp_levels)
        last = len(self.config.fc_widths) - 2
        for j in range(last + 1):
            x = dense(x, self.params[f"fc{j}.weight"], self.params[f"fc{j}.bias"])
            x = hard_sigmoid(x) if j == last else relu(x)
        return x

    def forward(self, graph: Graph) -> Tensor:
        """Predicted curve of length M for ``graph``'s adjacency matrix."""
        return self.forward_matrix(graph.adjacency_matrix(dtype=np.float32))


def build_model(config: ModelConfig, rng: Union[np.random.Generator, int, None] = None) -> SPPNet:
    """
    Initialize an SPP-CNN: He-uniform weights, zero biases.

    Raises:
        ConfigError: inconsistent pyramid and dense widths
    """
    config.validate()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    params: Dict[str, Parameter] = {}
    in_channels = 1
    for i, (kernel, channels) in enumerate(config.conv_groups):
        limit = np.sqrt(6.0 / (in_channels * kernel * kernel))
        params[f"conv{i}.weight"] = Parameter(
            rng.uniform(-limit, limit, size=(channels, in_channels, kernel, kernel)), name=f"conv{i}.weight"
        )
        params[f"conv{i}.bias"] = Parameter(np.zeros(channels), name=f"conv{i}.bias")
        in_channels = channels
    for j, (fan_in, fan_out) in enumerate(zip(config.fc_widths[:-1], config.fc_widths[1:])):
        limit = np.sqrt(6.0 / fan_in)
        params[f"fc{j}.weight"] = Parameter(rng.uniform(-limit, limit, size=(fan_in, fan_out)), name=f"fc{j}.weight")
        params[f"fc{j}.bias"] = Parameter(np.zeros(fan_out), name=f"fc{j}.bias")

    model = SPPNet(config, params)
    logger.info("built %s SPP-CNN with %s parameters", config.name, f"{model.parameter_count():,}")
    return model


def model_from_checkpoint(checkpoint: ModelCheckpoint) -> SPPNet:
    params = {name: Parameter(value, name=name) for name, value in checkpoint.params.items()}
    model = SPPNet(checkpoint.config, params, checkpoint.measure)
    expected = build_model_shapes(checkpoint.config)
    actual = {name: p.shape for name, p in params.items()}
    if expected != actual:
        raise ConfigError("checkpoint parameters do not match its architecture")
    return model


def build_model_shapes(config: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    shapes = {}
    in_channels = 1
    for i, (kernel, channels) in enumerate(config.conv_groups):
        shapes[f"conv{i}.weight"] = (channels, in_channels, kernel, kernel)
        shapes[f"conv{i}.bias"] = (channels,)
        in_channels = channels
    for j, (fan_in, fan_out) in enumerate(zip(config.fc_widths[:-1], config.fc_widths[1:])):
        shapes[f"fc{j}.weight"] = (fan_in, fan_out)
        shapes[f"fc{j}.bias"] = (fan_out,)
    return shapes


def predict_matrix(model: SPPNet, matrix: np.ndarray, length: int) -> np.ndarray:
    """Forward without recording, then resample the M-point output to ``length`` points."""
    with no_grad():
        output = model.forward_matrix(matrix.astype(np.float32)).data[0].astype(np.float64)
    return np.maximum(resample_curve(output, length), PREDICTION_FLOOR)


def predict(
    checkpoint: Union[ModelCheckpoint, SPPNet],
    graph: Graph,
    resize: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> RobustnessCurve:
    """
    Predict the robustness curve of ``graph`` (length = live node count).

    Args:
        checkpoint: Trained checkpoint (or an already-built model)
        graph: Network to assess
        resize: Feed a W×W resized adjacency instead (fixed-input baseline)
        rng: Randomness for the resize baseline
    """
    model = checkpoint if isinstance(checkpoint, SPPNet) else model_from_checkpoint(checkpoint)
    matrix = graph.adjacency_matrix(dtype=np.float32)
    if resize is not None:
        matrix, _ = resize_adjacency(matrix, resize, rng if rng is not None else np.random.default_rng(0))
    if graph.n_alive < 2:
        raise ShapeError("prediction needs at least two live nodes")
    values = predict_matrix(model, matrix, graph.n_alive)
    return RobustnessCurve(np.minimum(values, 1.0), model.measure, graph.n_alive)
