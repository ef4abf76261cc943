"""One-hidden-layer feed-forward network trained by online backpropagation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, TrainingDivergedError
from .preprocess import LagDataset
from .timeseries import format_float

HIDDEN_ACTIVATIONS = ("sigmoid",)
OUTPUT_ACTIVATIONS = ("identity", "sigmoid")


@dataclass(frozen=True)
class MlpTopology:
    input_width: int
    hidden_width: int
    hidden_activation: str = "sigmoid"
    output_activation: str = "identity"

    def __post_init__(self):
        if self.input_width < 1 or self.hidden_width < 1:
            raise ValueError("input_width and hidden_width must be >= 1")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"hidden_activation must be one of {HIDDEN_ACTIVATIONS}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"output_activation must be one of {OUTPUT_ACTIVATIONS}")

    @property
    def n_params(self) -> int:
        return kernels.n_params(self.input_width, self.hidden_width)


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Network parameters held in one flat vector (see ``kernels`` for layout).

    The named attributes are read-only views into ``params``.
    """

    topology: MlpTopology
    params: np.ndarray

    def __post_init__(self):
        p = np.array(self.params, dtype=np.float64).ravel()
        if p.size != self.topology.n_params:
            raise DimensionMismatchError(
                f"expected {self.topology.n_params} parameters, got {p.size}")
        p.setflags(write=False)
        object.__setattr__(self, "params", p)

    @classmethod
    def from_arrays(cls, topology, hidden_weights, hidden_biases, output_weights,
                    output_bias) -> MlpModel:
        h, d = topology.hidden_width, topology.input_width
        W = np.asarray(hidden_weights, dtype=np.float64)
        if W.shape != (h, d):
            raise DimensionMismatchError(f"hidden_weights must be {h}x{d}")
        flat = np.concatenate([W.ravel(), np.broadcast_to(hidden_biases, h),
                               np.broadcast_to(output_weights, h), [float(output_bias)]])
        return cls(topology, flat)

    @property
    def input_width(self) -> int:
        return self.topology.input_width

    @property
    def _dh(self):
        return self.topology.input_width, self.topology.hidden_width

    @property
    def hidden_weights(self) -> np.ndarray:
        d, h = self._dh
        return self.params[:h * d].reshape(h, d)

    @property
    def hidden_biases(self) -> np.ndarray:
        d, h = self._dh
        return self.params[h * d:h * d + h]

    @property
    def output_weights(self) -> np.ndarray:
        d, h = self._dh
        return self.params[h * d + h:h * d + 2 * h]

    @property
    def output_bias(self) -> float:
        return float(self.params[-1])

    @property
    def out_sigmoid(self) -> bool:
        return self.topology.output_activation == "sigmoid"

    def kernel_args(self):
        d, h = self._dh
        return self.params, d, h, self.out_sigmoid

    def predict(self, window) -> float:
        return forward(self, window)

    def predict_batch(self, inputs) -> np.ndarray:
        X = np.ascontiguousarray(inputs, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_width:
            raise DimensionMismatchError(
                f"inputs must have shape (n, {self.input_width}), got {X.shape}")
        return kernels.backend.predict_batch(*self.kernel_args(), X)

    def __eq__(self, other):
        if not isinstance(other, MlpModel):
            return NotImplemented
        return self.topology == other.topology and np.array_equal(self.params, other.params)


def init_model(topology: MlpTopology, seed: int) -> MlpModel:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights per layer, zero biases."""
    d, h = topology.input_width, topology.hidden_width
    rng = np.random.default_rng(seed)
    W = rng.uniform(-1.0 / math.sqrt(d), 1.0 / math.sqrt(d), size=(h, d))
    v = rng.uniform(-1.0 / math.sqrt(h), 1.0 / math.sqrt(h), size=h)
    return MlpModel.from_arrays(topology, W, np.zeros(h), v, 0.0)


def _check_input(model: MlpModel, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (model.input_width,):
        raise DimensionMismatchError(
            f"expected input of width {model.input_width}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("inputs must be finite")
    return x


def forward(model: MlpModel, x) -> float:
    x = _check_input(model, x)
    return float(kernels.backend.forward_one(*model.kernel_args(), x))


def gradient(model: MlpModel, x, target: float) -> MlpModel:
    """Gradient of 0.5*(forward(x) - target)**2, returned as an MlpModel.

    The returned object shares the model's topology; each of its parameters
    holds the partial derivative with respect to the matching parameter.
    """
    x = _check_input(model, x)
    grad = np.empty(model.topology.n_params)
    kernels.backend.gradient_one(*model.kernel_args(), x, float(target), grad)
    return MlpModel(model.topology, grad)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    max_epochs: int = 500
    patience: int = 25
    seed: int = 0
    shuffle_each_epoch: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass
class TrainingTrace:
    train_rmse: list[float] = field(default_factory=list)
    validation_rmse: list[float] = field(default_factory=list)
    best_epoch: int = -1

    @property
    def epochs(self) -> int:
        return len(self.train_rmse)


def _check_dataset(model: MlpModel, ds: LagDataset, name: str):
    if ds.inputs.ndim != 2 or ds.inputs.shape[1] != model.input_width:
        raise DimensionMismatchError(
            f"{name} set has input width {ds.inputs.shape[-1]}, model expects "
            f"{model.input_width}")


def train(model: MlpModel, train_set: LagDataset, validation_set: LagDataset | None,
          config: TrainConfig = TrainConfig()) -> tuple[MlpModel, TrainingTrace]:
    """Online SGD with per-epoch validation and best-snapshot selection.

    After each epoch the RMSE over the training and validation sets is
    recorded; the returned model is the snapshot with the lowest validation
    RMSE (training RMSE when no validation set is given). With ``patience``
    > 0, training stops after that many epochs without improvement.
    """
    if len(train_set) == 0:
        raise ValueError("empty training set")
    _check_dataset(model, train_set, "training")
    if validation_set is not None and len(validation_set) == 0:
        validation_set = None
    if validation_set is not None:
        _check_dataset(model, validation_set, "validation")

    k = kernels.backend
    params = model.params.copy()
    _, d, h, out_sig = model.kernel_args()
    X, y = np.ascontiguousarray(train_set.inputs), np.ascontiguousarray(train_set.targets)
    if validation_set is not None:
        Xv = np.ascontiguousarray(validation_set.inputs)
        yv = np.ascontiguousarray(validation_set.targets)

    rng = np.random.default_rng(config.seed)
    identity = np.arange(len(train_set))
    trace = TrainingTrace()
    best_score, best_params, stale = math.inf, params.copy(), 0

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(train_set)) if config.shuffle_each_epoch else identity
        bad = k.sgd_epoch(params, d, h, out_sig, X, y, order, config.learning_rate)
        if bad >= 0:
            raise TrainingDivergedError(epoch, int(order[bad]))
        if not np.all(np.isfinite(params)):
            raise TrainingDivergedError(epoch, len(train_set) - 1)
        tr = float(k.dataset_rmse(params, d, h, out_sig, X, y))
        va = float(k.dataset_rmse(params, d, h, out_sig, Xv, yv)) if validation_set is not None else tr
        trace.train_rmse.append(tr)
        trace.validation_rmse.append(va)
        if va < best_score:
            best_score, best_params, stale = va, params.copy(), 0
            trace.best_epoch = epoch
        else:
            stale += 1
            if config.patience and stale >= config.patience:
                break
    return MlpModel(model.topology, best_params), trace


def evaluate_rmse(model: MlpModel, ds: LagDataset) -> float:
    _check_dataset(model, ds, "evaluation")
    return float(kernels.backend.dataset_rmse(*model.kernel_args(),
                                              np.ascontiguousarray(ds.inputs),
                                              np.ascontiguousarray(ds.targets)))


# -- serialization ---------------------------------------------------------

MODEL_HEADER = "# aging-forecast mlp v1"


def dumps_model(model: MlpModel, extra: dict[str, float] | None = None) -> str:
    t = model.topology
    lines = [MODEL_HEADER,
             f"input_width={t.input_width}",
             f"hidden_width={t.hidden_width}",
             f"hidden_activation={t.hidden_activation}",
             f"output_activation={t.output_activation}"]
    for key, val in (extra or {}).items():
        lines.append(f"{key}={format_float(val)}")
    W = model.hidden_weights
    for j in range(t.hidden_width):
        for i in range(t.input_width):
            lines.append(f"hidden_weights[{j},{i}]={format_float(W[j, i])}")
    for j, b in enumerate(model.hidden_biases):
        lines.append(f"hidden_biases[{j}]={format_float(b)}")
    for j, v in enumerate(model.output_weights):
        lines.append(f"output_weights[{j}]={format_float(v)}")
    lines.append(f"output_bias={format_float(model.output_bias)}")
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> tuple[MlpModel, dict[str, float]]:
    """Parse ``dumps_model`` output; returns the model and any extra keys."""
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"malformed model line: {raw!r}")
        fields[key.strip()] = val.strip()
    try:
        topo = MlpTopology(int(fields.pop("input_width")), int(fields.pop("hidden_width")),
                           fields.pop("hidden_activation"), fields.pop("output_activation"))
    except KeyError as exc:
        raise ValueError(f"model file lacks topology key {exc}") from None
    d, h = topo.input_width, topo.hidden_width
    try:
        W = [[float(fields.pop(f"hidden_weights[{j},{i}]")) for i in range(d)] for j in range(h)]
        b = [float(fields.pop(f"hidden_biases[{j}]")) for j in range(h)]
        v = [float(fields.pop(f"output_weights[{j}]")) for j in range(h)]
        c = float(fields.pop("output_bias"))
    except KeyError as exc:
        raise ValueError(f"model file lacks parameter {exc}") from None
    extra = {key: float(val) for key, val in fields.items()}
    return MlpModel.from_arrays(topo, W, b, v, c), extra


def save_model(model: MlpModel, path, extra: dict[str, float] | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_model(model, extra))
    return path


def load_model(path) -> tuple[MlpModel, dict[str, float]]:
    return loads_model(Path(path).read_text())
