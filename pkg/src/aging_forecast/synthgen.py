"""Seeded synthetic aging signals: trending response time with spikes, a
seasonal swap-usage staircase, and a free-memory sawtooth.

Random numbers come from SplitMix64, chosen because it is tiny and trivially
portable. Output ``k`` (0-based) of a generator seeded with ``s`` is::

    z = (s + (k + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z = z ^ (z >> 31)

A uniform double is ``(z >> 11) * 2**-53``. Sample ``t`` of every shape
consumes draws ``3t``, ``3t+1`` and ``3t+2``: the first two give a standard
normal by Box-Muller, ``sqrt(-2 ln(1 - u0)) * cos(2 pi u1)``, and the third
is the spike coin (``u2 < spike_rate``). Shapes that do not use a draw still
consume it, so toggling spikes never perturbs the noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .timeseries import TimeSeries

SHAPES = ("response_time", "swap_staircase", "memory_sawtooth")

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = 2**64 - 1


def splitmix64(seed: int, count: int) -> np.ndarray:
    """The first ``count`` outputs of SplitMix64 seeded with ``seed``."""
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + k * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int) -> np.ndarray:
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


# Per-shape defaults; units are ms (response time) or kB (swap, memory).
SHAPE_DEFAULTS = {
    "response_time": dict(base_level=50.0, trend_per_step=0.005, noise_sigma=1.0,
                          spike_rate=0.01, spike_magnitude=100.0, sample_interval=60.0),
    "swap_staircase": dict(base_level=20000.0, season_period=200, season_step=500.0,
                           noise_sigma=5.0, sample_interval=300.0),
    "memory_sawtooth": dict(base_level=100000.0, trend_per_step=40.0, reset_floor=20000.0,
                            noise_sigma=300.0, sample_interval=60.0),
}

_VARIABLE = {"response_time": "response_time", "swap_staircase": "swap_used",
             "memory_sawtooth": "free_mem"}


@dataclass(frozen=True)
class SynthSpec:
    """Generator settings. Fields left as ``None`` take the shape's default."""

    shape: str = "swap_staircase"
    length: int = 5000
    seed: int = 0
    base_level: float | None = None
    trend_per_step: float | None = None
    season_period: int | None = None
    season_step: float | None = None
    spike_rate: float | None = None
    spike_magnitude: float | None = None
    reset_floor: float | None = None
    noise_sigma: float | None = None
    sample_interval: float | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        defaults = SHAPE_DEFAULTS[self.shape]
        for f in fields(self):
            if getattr(self, f.name) is None:
                object.__setattr__(self, f.name, defaults.get(f.name, 0.0))
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not 0.0 <= self.spike_rate <= 1.0:
            raise ValueError("spike_rate must lie in [0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be > 0")
        numeric = [getattr(self, f.name) for f in fields(self) if f.name != "shape"]
        if not all(math.isfinite(x) for x in numeric):
            raise ValueError("all shape parameters must be finite")
        if self.shape == "swap_staircase" and (int(self.season_period) != self.season_period
                                               or self.season_period < 2):
            raise ValueError("season_period must be an integer >= 2")
        if self.shape == "memory_sawtooth":
            if self.trend_per_step <= 0:
                raise ValueError("memory_sawtooth needs trend_per_step > 0")
            if not self.base_level > self.reset_floor:
                raise ValueError("memory_sawtooth needs base_level > reset_floor")

    def with_(self, **changes) -> SynthSpec:
        return replace(self, **changes)


def _draws(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    u = uniforms(spec.seed, 3 * spec.length).reshape(spec.length, 3)
    gauss = np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
    return gauss, u[:, 2]


def components(spec: SynthSpec) -> dict[str, np.ndarray]:
    """Deterministic signal, noise and spike parts before clamping."""
    t = np.arange(spec.length, dtype=np.float64)
    gauss, coin = _draws(spec)
    noise = spec.noise_sigma * gauss
    spikes = np.zeros(spec.length)
    if spec.shape == "response_time":
        signal = spec.base_level + spec.trend_per_step * t
        spikes = np.where(coin < spec.spike_rate, float(spec.spike_magnitude), 0.0)
    elif spec.shape == "swap_staircase":
        signal = spec.base_level + spec.season_step * np.floor(t / spec.season_period)
    else:
        signal = _sawtooth(spec)
    return {"signal": signal, "noise": noise, "spikes": spikes}


def _sawtooth(spec: SynthSpec) -> np.ndarray:
    out = np.empty(spec.length)
    level = spec.base_level
    for k in range(spec.length):
        out[k] = level
        level -= spec.trend_per_step
        if level < spec.reset_floor:
            level = spec.base_level
    return out


def generate(spec: SynthSpec) -> TimeSeries:
    parts = components(spec)
    values = parts["signal"] + parts["noise"] + parts["spikes"]
    if spec.shape != "response_time":
        values = np.maximum(values, 0.0)
    return TimeSeries(values, sample_interval=float(spec.sample_interval),
                      variable_name=_VARIABLE[spec.shape])
