"""Statistics over run artifacts: cross-correlation curves, ecology
configuration lifetimes, appearance probabilities, transition rates,
opportunity mixes, waiting times, and the resistance statistic.

Every function here is pure over immutable artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .arbitrage import OpportunityKind, OpportunityRecord
from .engine import RunArtifacts
from .lob import MarketId, TransactionKind
from .trend import ALL_CONFIGS, EcologyConfig

#: Pair ordering used for reports: (time-scale, correlation) curves are
#: produced for these three market pairs.
PAIR_ORDER: Tuple[Tuple[MarketId, MarketId], ...] = (
    (MarketId.USDJPY, MarketId.EURUSD),
    (MarketId.EURUSD, MarketId.EURJPY),
    (MarketId.USDJPY, MarketId.EURJPY),
)


@dataclass(frozen=True)
class CorrelationCurve:
    pair: Tuple[MarketId, MarketId]
    omegas: np.ndarray
    rhos: np.ndarray
    sample_counts: np.ndarray


@dataclass(frozen=True)
class ConfigStats:
    """Per-configuration occupancy statistics, indexed by configuration code.

    ``mean_lifetime`` is in seconds and NaN for configurations without any
    complete (non-boundary) episode.  Transition rows are normalized over
    departures; rows without departures are all zero.
    """

    appearance: np.ndarray
    mean_lifetime: np.ndarray
    episode_count: np.ndarray
    transition_matrix: np.ndarray


@dataclass(frozen=True)
class WaitingTimes:
    """Waiting-time samples, in seconds.

    ``to_first_opportunity``: per configuration, episode inception to first
    arbitrage opportunity.  ``opportunity_to_transition``: per configuration,
    first opportunity to the episode's end.  ``inter_transaction``: per
    market, gaps between maker-maker transactions (predatory trades are
    excluded).  Boundary-truncated episodes contribute no samples.
    """

    to_first_opportunity: Dict[EcologyConfig, np.ndarray]
    opportunity_to_transition: Dict[EcologyConfig, np.ndarray]
    inter_transaction: Dict[MarketId, np.ndarray]


def _stride_for(omega: float, dt: float) -> int:
    if omega <= 0:
        raise ValueError("omega must be positive")
    stride = omega / dt
    k = int(round(stride))
    if k < 1 or abs(stride - k) > 1e-9 * max(1.0, stride):
        raise ValueError(f"omega {omega} is not a positive multiple of dt {dt}")
    return k


def _differences(series: np.ndarray, stride: int) -> np.ndarray:
    return np.diff(np.asarray(series, dtype=float)[::stride])


def cross_correlation(
    series_i: Sequence[float],
    series_j: Sequence[float],
    omega: float,
    dt: float,
) -> float:
    """Pearson correlation of non-overlapping mid-price changes at scale omega.

    Both series are sampled every ``omega`` seconds; the correlation is over
    the per-interval changes.  Raises for degenerate (zero-variance) series.
    """
    stride = _stride_for(omega, dt)
    x = np.asarray(series_i, dtype=float)
    y = np.asarray(series_j, dtype=float)
    if x.size != y.size:
        raise ValueError("series must be synchronized and equally long")
    if x.size < 3 * stride:
        raise ValueError("series too short for this omega")
    return _pearson(_differences(x, stride), _differences(y, stride))


def pooled_cross_correlation(
    series_pairs: Iterable[Tuple[Sequence[float], Sequence[float]]],
    omega: float,
    dt: float,
) -> Tuple[float, int]:
    """Correlation at scale omega with differences pooled across runs.

    Returns (rho, number of pooled difference samples).
    """
    stride = _stride_for(omega, dt)
    xs: List[np.ndarray] = []
    ys: List[np.ndarray] = []
    for series_i, series_j in series_pairs:
        xs.append(_differences(np.asarray(series_i, dtype=float), stride))
        ys.append(_differences(np.asarray(series_j, dtype=float), stride))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    if x.size < 2:
        raise ValueError("not enough pooled samples")
    return _pearson(x, y), int(x.size)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    mean_x = x.mean()
    mean_y = y.mean()
    var_x = (x * x).mean() - mean_x * mean_x
    var_y = (y * y).mean() - mean_y * mean_y
    if var_x <= 0.0 or var_y <= 0.0:
        raise ValueError("degenerate series")
    cov = (x * y).mean() - mean_x * mean_y
    rho = cov / np.sqrt(var_x * var_y)
    return float(min(1.0, max(-1.0, rho)))


def correlation_curve(
    artifacts: RunArtifacts,
    pair: Tuple[MarketId, MarketId],
    omega_grid: Sequence[float],
) -> CorrelationCurve:
    """One correlation per time-scale for a market pair of one run."""
    omegas = np.array(sorted(set(float(w) for w in omega_grid)))
    dt = artifacts.dt
    series_i = artifacts.mid_series[pair[0]]
    series_j = artifacts.mid_series[pair[1]]
    rhos = np.empty(omegas.size)
    counts = np.empty(omegas.size, dtype=int)
    for idx, omega in enumerate(omegas):
        stride = _stride_for(omega, dt)
        rhos[idx] = cross_correlation(series_i, series_j, omega, dt)
        counts[idx] = _differences(series_i, stride).size
    return CorrelationCurve(pair, omegas, rhos, counts)


def _sticky_states(trend_values: np.ndarray) -> np.ndarray:
    """Per-step signs with exact zeros inheriting the previous state (+ at start)."""
    signs = np.sign(np.asarray(trend_values, dtype=float)).astype(np.int8)
    idx = np.arange(signs.size)
    last_nonzero = np.maximum.accumulate(np.where(signs != 0, idx, -1))
    states = np.where(
        last_nonzero >= 0, signs[np.maximum(last_nonzero, 0)], np.int8(1)
    ).astype(np.int8)
    return states


def ecology_timeline(trend_series: Mapping[MarketId, Sequence[float]]) -> np.ndarray:
    """Per-step configuration codes from the three markets' trend series."""
    states = {m: _sticky_states(np.asarray(trend_series[m])) for m in MarketId}
    lengths = {s.size for s in states.values()}
    if len(lengths) != 1:
        raise ValueError("trend series must be aligned")
    codes = (
        ((states[MarketId.EURUSD] > 0).astype(np.uint8) << 2)
        | ((states[MarketId.USDJPY] > 0).astype(np.uint8) << 1)
        | (states[MarketId.EURJPY] > 0).astype(np.uint8)
    )
    return codes


def market_states_from_timeline(timeline: np.ndarray, market: MarketId) -> np.ndarray:
    """Extract one market's +/-1 state sequence from a configuration timeline."""
    shift = 2 - int(market)
    bits = (np.asarray(timeline).astype(np.uint8) >> shift) & 1
    return np.where(bits == 1, 1, -1).astype(np.int8)


def _episodes(timeline: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(start, end-exclusive, code) arrays of maximal constant runs."""
    timeline = np.asarray(timeline)
    if timeline.size == 0:
        raise ValueError("timeline is empty")
    change = np.nonzero(np.diff(timeline))[0] + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [timeline.size]))
    return starts, ends, timeline[starts].astype(int)


def config_stats(timeline: np.ndarray, dt: float) -> ConfigStats:
    """Occupancy statistics of the eight configurations.

    Episodes are maximal constant runs of the timeline.  Episodes truncated
    by the run boundaries are excluded from lifetime means (but counted in
    appearance probabilities); transitions are the consecutive episode
    pairs, normalized per departed configuration.
    """
    timeline = np.asarray(timeline)
    starts, ends, codes = _episodes(timeline)
    lengths = ends - starts

    appearance = np.bincount(timeline.astype(int), minlength=8) / timeline.size

    mean_lifetime = np.full(8, np.nan)
    episode_count = np.zeros(8, dtype=int)
    if codes.size > 2:
        interior_codes = codes[1:-1]
        interior_lengths = lengths[1:-1]
        for config_code in range(8):
            mask = interior_codes == config_code
            episode_count[config_code] = int(mask.sum())
            if mask.any():
                mean_lifetime[config_code] = float(interior_lengths[mask].mean()) * dt

    transitions = np.zeros((8, 8))
    if codes.size > 1:
        np.add.at(transitions, (codes[:-1], codes[1:]), 1.0)
        row_totals = transitions.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            transitions = np.where(row_totals > 0, transitions / row_totals, 0.0)
    return ConfigStats(appearance, mean_lifetime, episode_count, transitions)


def same_state_probability(timeline: np.ndarray, pair: Tuple[MarketId, MarketId]) -> float:
    """Fraction of steps on which the two markets share the same state."""
    timeline = np.asarray(timeline)
    if timeline.size == 0:
        raise ValueError("timeline is empty")
    a = market_states_from_timeline(timeline, pair[0])
    b = market_states_from_timeline(timeline, pair[1])
    return float(np.mean(a == b))


def opportunity_type_fractions(
    opportunity_log: Sequence[OpportunityRecord],
) -> Dict[EcologyConfig, Tuple[float, float]]:
    """Per configuration, the (type-1, type-2) opportunity shares."""
    counts = np.zeros((8, 2))
    for record in opportunity_log:
        column = 0 if record.kind is OpportunityKind.TYPE_I else 1
        counts[record.config.code, column] += 1
    fractions: Dict[EcologyConfig, Tuple[float, float]] = {}
    for code in range(8):
        total = counts[code].sum()
        if total > 0:
            fractions[ALL_CONFIGS[code]] = (
                float(counts[code, 0] / total),
                float(counts[code, 1] / total),
            )
    return fractions


def waiting_time_distributions(artifacts: RunArtifacts) -> WaitingTimes:
    """Waiting-time samples behind the model's event-timing distributions."""
    dt = artifacts.dt
    starts, ends, codes = _episodes(artifacts.config_timeline)
    opportunity_steps = np.array(
        [record.step_index for record in artifacts.opportunity_log], dtype=int
    )

    to_first: Dict[EcologyConfig, List[float]] = {cfg: [] for cfg in ALL_CONFIGS}
    to_transition: Dict[EcologyConfig, List[float]] = {cfg: [] for cfg in ALL_CONFIGS}
    # Boundary-truncated first/last episodes are excluded: their inception or
    # transition is not observed.
    for ep in range(1, len(starts) - 1):
        start, end = int(starts[ep]), int(ends[ep])
        pos = np.searchsorted(opportunity_steps, start, side="left")
        if pos == opportunity_steps.size or opportunity_steps[pos] >= end:
            continue
        first = int(opportunity_steps[pos])
        cfg = ALL_CONFIGS[codes[ep]]
        to_first[cfg].append((first - start) * dt)
        to_transition[cfg].append((end - first) * dt)

    inter: Dict[MarketId, np.ndarray] = {}
    for market in MarketId:
        steps = [
            tx.step_index
            for tx in artifacts.transaction_log
            if tx.market is market and tx.kind is TransactionKind.MAKER_MAKER
        ]
        inter[market] = np.diff(np.asarray(steps, dtype=float)) * dt

    return WaitingTimes(
        to_first_opportunity={c: np.asarray(v) for c, v in to_first.items()},
        opportunity_to_transition={c: np.asarray(v) for c, v in to_transition.items()},
        inter_transaction=inter,
    )


def empirical_ccdf(samples: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted sample values with P(X > x) at each; CCDF(0) is 1 for positive data."""
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise ValueError("no samples")
    survival = 1.0 - np.arange(1, values.size + 1) / values.size
    return values, survival


def resistance_statistic(
    trend_series: Mapping[MarketId, np.ndarray],
    opportunity_log: Sequence[OpportunityRecord],
    center: Mapping[MarketId, float],
) -> Dict[EcologyConfig, Dict[MarketId, float]]:
    """Mean |trend| / initial-center, sampled at opportunity emergence.

    Normalizing by the initial center of mass makes the trend magnitudes
    comparable across markets with different price scales; higher values
    mean the market's state is harder to flip.
    """
    if not opportunity_log:
        raise ValueError("no opportunities to sample")
    sums = np.zeros((8, 3))
    counts = np.zeros(8, dtype=int)
    for record in opportunity_log:
        code = record.config.code
        counts[code] += 1
        for market in MarketId:
            value = abs(float(trend_series[market][record.step_index])) / center[market]
            sums[code, int(market)] += value
    result: Dict[EcologyConfig, Dict[MarketId, float]] = {}
    for code in range(8):
        if counts[code]:
            result[ALL_CONFIGS[code]] = {
                market: float(sums[code, int(market)] / counts[code]) for market in MarketId
            }
    return result
