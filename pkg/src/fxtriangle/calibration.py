"""Model initialization and the relations tying simulation time to seconds.

The per-market noise amplitude is never configured directly: it is derived
from the spread, the maker count, and the common mean inter-transaction
time so that all three markets trade at the same pace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence, Tuple, Union

import numpy as np

from .lob import MarketId

PerMarket = Tuple[float, float, float]


def _per_market(value: Union[float, Sequence[float], Mapping[MarketId, float]], name: str) -> PerMarket:
    if isinstance(value, Mapping):
        return tuple(float(value[m]) for m in MarketId)  # type: ignore[return-value]
    if isinstance(value, (int, float)):
        return (float(value),) * 3
    out = tuple(float(v) for v in value)
    if len(out) != 3:
        raise ValueError(f"{name} needs one value per market")
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class CalibrationParams:
    """Static parameters of one experiment, ordered (EUR/USD, USD/JPY, EUR/JPY).

    ``mean_wait`` is the target average time between two maker-maker
    transactions (seconds), shared by all markets; ``volatility`` is derived
    from it.
    """

    center: PerMarket
    spread: PerMarket
    makers: Tuple[int, int, int]
    mean_wait: float
    dt: float
    trend_strength: PerMarket

    def __post_init__(self) -> None:
        if any(c <= 0 for c in self.center) or any(s <= 0 for s in self.spread):
            raise ValueError("prices and spreads must be positive")
        if any(n < 1 for n in self.makers):
            raise ValueError("each market needs at least one maker")
        if self.mean_wait <= 0 or self.dt <= 0:
            raise ValueError("mean_wait and dt must be positive")

    @property
    def volatility(self) -> PerMarket:
        """Per-market update noise: spread / sqrt(2 * makers * mean_wait)."""
        return tuple(
            s / math.sqrt(2.0 * n * self.mean_wait)
            for s, n in zip(self.spread, self.makers)
        )  # type: ignore[return-value]

    @property
    def trend_scale(self) -> PerMarket:
        """Dimensionless 1 / (trend_strength * mean_wait) per market."""
        return tuple(1.0 / (c * self.mean_wait) for c in self.trend_strength)  # type: ignore[return-value]


def default_parameters(
    makers: Union[Sequence[int], Mapping[MarketId, int]] = (35, 45, 25),
    trend_strength: Union[float, Sequence[float]] = 0.8,
    mean_wait: float = 0.7,
    dt: float = 0.01,
) -> CalibrationParams:
    """Reference calibration: centers 1.25 / 110 / 137.5, spreads scaled
    proportionally off the 0.05 USD/JPY-relative base, 0.7 s between trades,
    10 ms steps, trend-following strength 0.8."""
    if isinstance(makers, Mapping):
        maker_counts = tuple(int(makers[m]) for m in MarketId)
    else:
        maker_counts = tuple(int(n) for n in makers)
    if len(maker_counts) != 3:
        raise ValueError("makers needs one count per market")
    center = (1.25, 110.0, 137.5)
    base = 0.05
    spread = tuple(base * (p / center[0]) for p in center)
    return CalibrationParams(
        center=center,
        spread=spread,  # type: ignore[arg-type]
        makers=maker_counts,  # type: ignore[arg-type]
        mean_wait=float(mean_wait),
        dt=float(dt),
        trend_strength=_per_market(trend_strength, "trend_strength"),
    )


def with_makers(params: CalibrationParams, makers: Sequence[int]) -> CalibrationParams:
    """Same calibration with a different maker population (noise re-derives)."""
    counts = tuple(int(n) for n in makers)
    if len(counts) != 3:
        raise ValueError("makers needs one count per market")
    return replace(params, makers=counts)


def sample_initial_dealing_price(
    u: Union[float, np.ndarray],
    spread: float,
    center: float,
) -> Union[float, np.ndarray]:
    """Map a uniform(0,1) draw to an initial dealing price.

    Inverse-CDF sampling of the stationary book profile: offsets from the
    center follow the symmetric triangular density on [-spread/2, spread/2].
    Accepts a scalar or an array of draws.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    half = 0.5 * spread
    offset = np.where(
        arr <= 0.5,
        half * (np.sqrt(2.0 * arr) - 1.0),
        half * (1.0 - np.sqrt(2.0 * (1.0 - arr))),
    )
    result = center + offset
    if np.isscalar(u) or getattr(u, "ndim", 1) == 0:
        return float(result)
    return result


def stationary_profile_density(offset: Union[float, np.ndarray], spread: float):
    """Triangular density of dealing-price offsets under a stable book."""
    if spread <= 0:
        raise ValueError("spread must be positive")
    r = np.asarray(offset, dtype=float)
    inside = np.abs(r) <= spread / 2.0
    value = (2.0 / spread) * (1.0 - np.abs(2.0 * r / spread))
    result = np.where(inside, value, 0.0)
    return float(result) if result.ndim == 0 else result


def stationary_profile_cdf(offset: Union[float, np.ndarray], spread: float):
    """Closed-form CDF of the triangular offset density."""
    if spread <= 0:
        raise ValueError("spread must be positive")
    r = np.asarray(offset, dtype=float)
    lower = (spread + 2.0 * r) ** 2 / (2.0 * spread**2)
    upper = 1.0 - (spread - 2.0 * r) ** 2 / (2.0 * spread**2)
    result = np.where(r <= 0.0, lower, upper)
    result = np.where(r <= -spread / 2.0, 0.0, result)
    result = np.where(r >= spread / 2.0, 1.0, result)
    return float(result) if result.ndim == 0 else result


def theoretical_mean_wait(spread: float, makers: int, volatility: float) -> float:
    """Expected seconds between maker-maker trades: L^2 / (2 N sigma^2)."""
    if spread <= 0 or makers <= 0 or volatility <= 0:
        raise ValueError("all arguments must be positive")
    return spread**2 / (2.0 * makers * volatility**2)


def steps_to_seconds(steps: int, dt: float) -> float:
    """Convert a step count to real seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return steps * dt
