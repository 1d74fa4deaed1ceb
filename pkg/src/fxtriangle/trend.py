"""Price-trend signals and the market states they induce.

The trend of a market is a weighted average of its most recent transaction
price changes: exponentially weighted for the main model, linearly weighted
for the dealer-model baseline.  The sign of the trend is the market's state;
the triple of states across the three markets is an ecology configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from .lob import MarketId


class TrendScheme(Enum):
    EXPONENTIAL = "exponential"
    LINEAR = "linear"


@dataclass(frozen=True, slots=True)
class TrendConfig:
    """Window length (number of price changes) and exponential decay scale."""

    window: int = 15
    decay: float = 5.0
    scheme: TrendScheme = TrendScheme.EXPONENTIAL

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("trend window must be >= 1")
        if self.decay <= 0:
            raise ValueError("trend decay must be positive")


def trend_exponential(changes: Sequence[float], window: int, decay: float) -> float:
    """Exponentially weighted average of recent price changes.

    ``changes`` is ordered most recent first; change ``k`` carries weight
    ``exp(-k / decay)``.  Weights are renormalized over however many changes
    are available (warm-up), so a constant sequence always averages to that
    constant.  An empty sequence yields 0.
    """
    m = min(window, len(changes))
    if m == 0:
        return 0.0
    weights = np.exp(-np.arange(m) / decay)
    return float(np.dot(np.asarray(changes[:m], dtype=float), weights) / weights.sum())


def trend_linear(changes: Sequence[float], window: int) -> float:
    """Linearly weighted average: change ``k`` carries weight ``window - k``.

    Over a full window the weights are ``2 (window - k) / (window (window + 1))``
    and sum to one exactly; during warm-up they are renormalized over the
    available changes.
    """
    m = min(window, len(changes))
    if m == 0:
        return 0.0
    weights = (window - np.arange(m)).astype(float)
    return float(np.dot(np.asarray(changes[:m], dtype=float), weights) / weights.sum())


def trend_sign(value: float, previous: int = 1) -> int:
    """Market state: the sign of the trend, sticky through exact zeros."""
    if value > 0:
        return 1
    if value < 0:
        return -1
    return previous


@dataclass(frozen=True, slots=True)
class EcologyConfig:
    """One of the eight combinations of the three market states.

    The code packs the states as bits (1 for +) in the fixed order
    (EUR/USD, USD/JPY, EUR/JPY): ``{+,+,+}`` is 7 and ``{-,-,-}`` is 0.
    """

    code: int

    def __post_init__(self) -> None:
        if not 0 <= self.code < 8:
            raise ValueError("configuration code must be in 0..7")

    @classmethod
    def from_signs(cls, eurusd: int, usdjpy: int, eurjpy: int) -> "EcologyConfig":
        code = ((eurusd > 0) << 2) | ((usdjpy > 0) << 1) | (eurjpy > 0)
        return ALL_CONFIGS[code]

    @property
    def signs(self) -> Tuple[int, int, int]:
        return (
            1 if self.code & 4 else -1,
            1 if self.code & 2 else -1,
            1 if self.code & 1 else -1,
        )

    def state(self, market: MarketId) -> int:
        return self.signs[int(market)]

    @property
    def compact(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    @classmethod
    def from_compact(cls, text: str) -> "EcologyConfig":
        cleaned = [c for c in text if c in "+-"]
        if len(cleaned) != 3:
            raise ValueError(f"cannot parse configuration {text!r}")
        return cls.from_signs(*(1 if c == "+" else -1 for c in cleaned))

    def __str__(self) -> str:
        return "{" + ",".join("+" if s > 0 else "-" for s in self.signs) + "}"


ALL_CONFIGS: Tuple[EcologyConfig, ...] = tuple(EcologyConfig(code) for code in range(8))
