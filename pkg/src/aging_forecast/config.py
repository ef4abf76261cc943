"""Pipeline configuration: flat ``key = value`` files, env and flag overrides.

Precedence, highest first: command-line flags, ``AGING_SEED`` (base seed
only), config file, built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .forecast import DIRECTIONS, RISING
from .mlp import OUTPUT_ACTIVATIONS, TrainConfig
from .preprocess import ALIGNMENTS
from .timeseries import SplitSpec
from .tuner import SELECTION_SEGMENTS, GridSpec

SEED_ENV = "AGING_SEED"


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if text in (None, "", "none") else float(text)


def _opt_int(text):
    return None if text in (None, "", "none") else int(text)


@dataclass
class PipelineConfig:
    input: str = ""
    column: str = "0"
    sample_interval: float = 1.0
    variable: str = ""
    despike_window: int = 0
    despike_align: str = "leading"
    train_fraction: float = 0.6
    validation_fraction: float = 0.2
    lags: tuple[int, ...] = (3, 4, 5, 6, 7)
    hidden: tuple[int, ...] = (2, 3, 4, 5, 6, 7)
    horizon: int = 1
    seeds_per_cell: int = 3
    learning_rate: float = 0.05
    max_epochs: int = 500
    patience: int = 25
    shuffle: bool = True
    output_activation: str = "identity"
    selection: str = "validation"
    workers: int = 1
    threshold: float | None = None
    direction: str = RISING
    max_horizon: int = 1000
    safety_margin: int | None = None
    output_dir: str = "aging_run"
    seed: int = 0

    def validate(self) -> PipelineConfig:
        """Check every field against the owning module's preconditions."""
        try:
            self.split_spec()
            self.grid_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        checks = [
            (self.sample_interval > 0, "sample_interval must be > 0"),
            (self.despike_window >= 0, "despike_window must be >= 0"),
            (self.despike_align in ALIGNMENTS, f"despike_align must be one of {ALIGNMENTS}"),
            (self.output_activation in OUTPUT_ACTIVATIONS,
             f"output_activation must be one of {OUTPUT_ACTIVATIONS}"),
            (self.selection in SELECTION_SEGMENTS,
             f"selection must be one of {SELECTION_SEGMENTS}"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.direction in DIRECTIONS, f"direction must be one of {DIRECTIONS}"),
            (self.max_horizon >= 1, "max_horizon must be >= 1"),
            (self.safety_margin is None or self.safety_margin >= 0,
             "safety_margin must be >= 0"),
            (self.threshold is None or self.horizon == 1,
             "exhaustion estimation needs horizon = 1 (iterated one-step forecasts)"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.validation_fraction)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.learning_rate, self.max_epochs, self.patience,
                           seed=self.seed, shuffle_each_epoch=self.shuffle)

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.lags, self.hidden, self.horizon, self.seeds_per_cell,
                        base_seed=self.seed, output_activation=self.output_activation,
                        train_config=self.train_config())

    def dumps(self) -> str:
        lines = []
        for key, val in asdict(self).items():
            if isinstance(val, tuple):
                val = ",".join(str(x) for x in val)
            elif isinstance(val, float):
                val = repr(val)
            elif val is None:
                val = ""
            elif isinstance(val, bool):
                val = "true" if val else "false"
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


_CONVERTERS = {
    "sample_interval": float, "despike_window": int, "train_fraction": float,
    "validation_fraction": float, "lags": _int_list, "hidden": _int_list, "horizon": int,
    "seeds_per_cell": int, "learning_rate": float, "max_epochs": int, "patience": int,
    "shuffle": _bool, "workers": int, "threshold": _opt_float, "max_horizon": int,
    "safety_margin": _opt_int, "seed": int,
}

KEYS = tuple(f.name for f in fields(PipelineConfig))


def convert(key: str, value):
    if key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    if key == "direction" and value in ("rising", "falling"):
        value = f"{value}_crossing"
    try:
        return _CONVERTERS.get(key, str)(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        out[key.strip()] = convert(key.strip(), value.strip())
    return out


def resolve(path=None, overrides: dict | None = None, env=None) -> PipelineConfig:
    """Merge defaults, file, ``AGING_SEED`` and flag overrides, then validate."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        path = Path(path)
        values.update(parse_config_text(path.read_text(), str(path)))
        inp = values.get("input")
        if inp and not Path(inp).is_absolute():
            values["input"] = str((path.parent / inp).resolve())
    if env.get(SEED_ENV):
        values["seed"] = convert("seed", env[SEED_ENV])
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = convert(key, val)
    return PipelineConfig(**values).validate()
