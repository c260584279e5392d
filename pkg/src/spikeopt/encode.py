"""Scalar <-> spike-train codes over a fixed window of ticks.

Values are normalized to [0, 1]. Trains are sorted lists of tick indices
within ``[0, window.length)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EncodingWindow:
    length: int
    resolution: int | None = None

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("window length must be >= 1")
        if self.resolution is None:
            object.__setattr__(self, "resolution", self.length)
        if not 1 <= self.resolution <= self.length:
            raise ValueError("resolution must lie in [1, length]")

    def levels(self) -> np.ndarray:
        """The distinguishable values ``k / (resolution - 1)``."""
        if self.resolution == 1:
            return np.array([0.0])
        return np.arange(self.resolution) / (self.resolution - 1)


def _round(x: float) -> int:
    # half-up; python's round() is half-even
    return int(math.floor(x + 0.5))


def _check_value(value: float):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"value {value} outside [0, 1]")


def _check_train(train, window: EncodingWindow):
    for t in train:
        if not 0 <= t < window.length:
            raise ValueError(f"spike at tick {t} outside window of length {window.length}")


def rate_encode(value: float, window: EncodingWindow) -> list[int]:
    """``round(value * T)`` spikes spread evenly over the window."""
    _check_value(value)
    count = _round(value * window.length)
    return [(i * window.length) // count for i in range(count)] if count else []


def rate_decode(train, window: EncodingWindow) -> float:
    _check_train(train, window)
    return len(train) / window.length


def ttfs_encode(value: float, window: EncodingWindow, silent_zero: bool = False) -> list[int]:
    """Time-to-first-spike: larger values spike earlier.

    With ``silent_zero`` a value of exactly 0 produces no spike instead of a
    spike on the last tick.
    """
    _check_value(value)
    if silent_zero and value == 0.0:
        return []
    return [_round((1.0 - value) * (window.length - 1))]


def ttfs_decode(train, window: EncodingWindow) -> float:
    _check_train(train, window)
    if not train:
        return 0.0
    if window.length == 1:
        return 1.0
    return 1.0 - min(train) / (window.length - 1)


def isi_encode(value: float, window: EncodingWindow) -> list[int]:
    """Two spikes whose gap is ``1 + round(value * (T - 2))``."""
    _check_value(value)
    if window.length < 3:
        raise ValueError("inter-spike coding needs a window of at least 3 ticks")
    return [0, 1 + _round(value * (window.length - 2))]


def isi_decode(train, window: EncodingWindow) -> float:
    if window.length < 3:
        raise ValueError("inter-spike coding needs a window of at least 3 ticks")
    _check_train(train, window)
    if len(train) != 2:
        raise ValueError("inter-spike code needs exactly two spikes")
    gap = abs(train[1] - train[0])
    return (gap - 1) / (window.length - 2)


def poisson_encode(value: float, window: EncodingWindow, rng: np.random.Generator) -> list[int]:
    """Each tick spikes independently with probability ``value``."""
    _check_value(value)
    return np.flatnonzero(rng.random(window.length) < value).tolist()
