"""Config parsing, market-data record ingestion, and result export.

The experiment config format is flat ``key = value`` text with an optional
``[extended]`` section, meant to be diffed and committed next to results.
Ingestion reads the tick-record layout used by inter-dealer FX feeds (Date,
Timestamp, Market, Event, Direction, Depth, Price, Volume) and rebuilds
per-market mid-price series on a 100 ms grid from depth-1 quotes.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass
from datetime import date as _date
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import analytics
from .arbitrage import RiskProfile
from .calibration import CalibrationParams, default_parameters
from .engine import RunArtifacts, SimulationConfig
from .lob import MarketId, Variant
from .trend import TrendConfig, TrendScheme

GRID_MS = 100

DEFAULT_OMEGA_GRID: Tuple[float, ...] = (0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0)

_HEADER = ("Date", "Timestamp", "Market", "Event", "Direction", "Depth", "Price", "Volume")


class ConfigParseError(ValueError):
    """Config text rejected; carries the offending line number."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class IngestError(ValueError):
    """Record ingestion rejected; carries the offending row number."""

    def __init__(self, row: int, message: str) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


# ---------------------------------------------------------------------------
# Experiment config files
# ---------------------------------------------------------------------------

_MARKET_SUFFIXES = {
    "eurusd": MarketId.EURUSD,
    "usdjpy": MarketId.USDJPY,
    "eurjpy": MarketId.EURJPY,
}

_BOOLEANS = {
    "on": True,
    "off": False,
    "true": True,
    "false": False,
    "yes": True,
    "no": False,
    "1": True,
    "0": False,
}


def _parse_bool(value: str, line: int, key: str) -> bool:
    try:
        return _BOOLEANS[value.strip().lower()]
    except KeyError:
        raise ConfigParseError(line, f"{key} expects on/off, got {value!r}") from None


def _parse_number(value: str, line: int, key: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigParseError(line, f"{key} expects a number, got {value!r}") from None


def parse_config(
    text: str,
    seed: Optional[int] = None,
    arbitrager: Optional[bool] = None,
    extended: Optional[bool] = None,
    variant: Optional[Variant] = None,
) -> SimulationConfig:
    """Parse experiment config text into a validated SimulationConfig.

    Keyword arguments override the corresponding file entries (they mirror
    the CLI flags).  Required keys: ``steps`` and ``seed``.  Unknown keys,
    missing required keys, and invariant violations raise
    :class:`ConfigParseError` with the line number.
    """
    scalars: Dict[str, Tuple[str, int]] = {}
    extended_keys: Dict[str, Tuple[str, int]] = {}
    section = ""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section != "extended":
                raise ConfigParseError(line_no, f"unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigParseError(line_no, f"expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        target = extended_keys if section == "extended" else scalars
        if key in target:
            raise ConfigParseError(line_no, f"duplicate key {key}")
        target[key] = (value, line_no)

    def take(key: str) -> Optional[Tuple[str, int]]:
        return scalars.pop(key, None)

    entry = take("steps")
    if entry is None:
        raise ConfigParseError(0, "missing required key: steps")
    steps = _parse_number(entry[0], entry[1], "steps", int)

    entry = take("seed")
    if entry is None and seed is None:
        raise ConfigParseError(0, "missing required key: seed")
    seed_value = seed if seed is not None else _parse_number(entry[0], entry[1], "seed", int)

    arb_enabled = True
    entry = take("arbitrager")
    if entry is not None:
        arb_enabled = _parse_bool(entry[0], entry[1], "arbitrager")
    if arbitrager is not None:
        arb_enabled = arbitrager

    variant_value = Variant.ARBITRAGER
    explicit_variant = take("variant")
    if explicit_variant is not None:
        name = explicit_variant[0].strip().lower()
        try:
            variant_value = Variant(name)
        except ValueError:
            raise ConfigParseError(
                explicit_variant[1], f"variant expects arbitrager or dealer, got {name!r}"
            ) from None
    if variant is not None:
        variant_value = variant

    defaults = default_parameters()
    makers = list(defaults.makers)
    trend_strength = list(defaults.trend_strength)
    center = list(defaults.center)
    spread = list(defaults.spread)
    mean_wait = defaults.mean_wait
    dt = defaults.dt

    # uniform keys first, then per-market keys refine them
    entry = take("c")
    if entry is not None:
        trend_strength = [_parse_number(entry[0], entry[1], "c")] * 3

    for prefix, store, kind in (
        ("n_", makers, int),
        ("c_", trend_strength, float),
        ("p0_", center, float),
        ("spread_", spread, float),
    ):
        for suffix, market in _MARKET_SUFFIXES.items():
            entry = take(prefix + suffix)
            if entry is not None:
                store[int(market)] = _parse_number(entry[0], entry[1], prefix + suffix, kind)
                if prefix == "n_" and store[int(market)] < 2:
                    raise ConfigParseError(entry[1], "N must be >= 2")

    entry = take("mean_wait")
    if entry is not None:
        mean_wait = _parse_number(entry[0], entry[1], "mean_wait")
    entry = take("dt")
    if entry is not None:
        dt = _parse_number(entry[0], entry[1], "dt")

    scheme = TrendScheme.LINEAR if variant_value is Variant.DEALER else TrendScheme.EXPONENTIAL
    entry = take("trend_scheme")
    if entry is not None:
        name = entry[0].strip().lower()
        try:
            scheme = TrendScheme(name)
        except ValueError:
            raise ConfigParseError(
                entry[1], f"trend_scheme expects exponential or linear, got {name!r}"
            ) from None
    window = 15
    entry = take("trend_window")
    if entry is not None:
        window = _parse_number(entry[0], entry[1], "trend_window", int)
    decay = 5.0
    entry = take("trend_decay")
    if entry is not None:
        decay = _parse_number(entry[0], entry[1], "trend_decay")

    if scalars:
        key, (_, line_no) = next(iter(scalars.items()))
        raise ConfigParseError(line_no, f"unknown key {key!r}")

    profile: Optional[RiskProfile] = None
    if extended_keys or extended:
        arb_scale = 0.0
        maker_scale = [0.0, 0.0, 0.0]
        peg_probability = 0.0
        entry = extended_keys.pop("lambda_a", None)
        if entry is not None:
            arb_scale = _parse_number(entry[0], entry[1], "lambda_a")
        entry = extended_keys.pop("lambda_mm", None)
        if entry is not None:
            maker_scale = [_parse_number(entry[0], entry[1], "lambda_mm")] * 3
        for suffix, market in _MARKET_SUFFIXES.items():
            entry = extended_keys.pop("lambda_mm_" + suffix, None)
            if entry is not None:
                maker_scale[int(market)] = _parse_number(entry[0], entry[1], "lambda_mm_" + suffix)
        entry = extended_keys.pop("gamma", None)
        if entry is not None:
            peg_probability = _parse_number(entry[0], entry[1], "gamma")
        if extended_keys:
            key, (_, line_no) = next(iter(extended_keys.items()))
            raise ConfigParseError(line_no, f"unknown key {key!r} in [extended]")
        try:
            profile = RiskProfile(arb_scale, tuple(maker_scale), peg_probability)
        except ValueError as exc:
            raise ConfigParseError(0, str(exc)) from None
    if extended is False:
        profile = None

    calibration = CalibrationParams(
        center=tuple(center),
        spread=tuple(spread),
        makers=tuple(makers),
        mean_wait=mean_wait,
        dt=dt,
        trend_strength=tuple(trend_strength),
    )
    try:
        return SimulationConfig(
            steps=steps,
            seed=seed_value,
            calibration=calibration,
            trend=TrendConfig(window, decay, scheme),
            arbitrager_enabled=arb_enabled,
            extended=profile,
            variant=variant_value,
        )
    except ValueError as exc:
        raise ConfigParseError(0, str(exc)) from None


def config_manifest(config: SimulationConfig) -> dict:
    """JSON-ready dictionary echoing the fully resolved configuration."""
    cal = config.calibration
    per_market = lambda values: {m.name: values[int(m)] for m in MarketId}
    manifest = {
        "steps": config.steps,
        "seed": config.seed,
        "variant": config.variant.value,
        "arbitrager_enabled": config.arbitrager_enabled,
        "trend": {
            "window": config.trend.window,
            "decay": config.trend.decay,
            "scheme": config.trend.scheme.value,
        },
        "calibration": {
            "center": per_market(cal.center),
            "spread": per_market(cal.spread),
            "makers": per_market(cal.makers),
            "mean_wait": cal.mean_wait,
            "dt": cal.dt,
            "trend_strength": per_market(cal.trend_strength),
            "volatility": per_market(cal.volatility),
        },
        "extended": None,
    }
    if config.extended is not None:
        manifest["extended"] = {
            "lambda_a": config.extended.arb_scale,
            "lambda_mm": per_market(config.extended.maker_scale),
            "gamma": config.extended.peg_probability,
        }
    return manifest


# ---------------------------------------------------------------------------
# Tick-record ingestion
# ---------------------------------------------------------------------------


class EventKind(Enum):
    QUOTE = "Quote"
    DEAL = "Deal"


class Direction(Enum):
    BUY = "Buy"
    SELL = "Sell"
    BID = "Bid"
    ASK = "Ask"


@dataclass(frozen=True, slots=True)
class EventRecord:
    date: _date
    timestamp_ms: int
    market: MarketId
    event: EventKind
    direction: Direction
    depth: int
    price: float
    volume: int


@dataclass(frozen=True)
class MidSeries:
    """Mid prices on the 100 ms grid, starting at ``start_ms`` (absolute)."""

    start_ms: int
    mids: np.ndarray

    @property
    def end_ms(self) -> int:
        return self.start_ms + (self.mids.size - 1) * GRID_MS


@dataclass(frozen=True)
class IngestResult:
    series: Dict[MarketId, MidSeries]
    records: int
    deal_rows: int


def _parse_timestamp(text: str, row: int) -> int:
    parts = text.strip().split(".")
    if len(parts) != 4:
        raise IngestError(row, f"bad timestamp {text!r} (expected HH.MM.SS.mmm)")
    try:
        hours, minutes, seconds, millis = (int(p) for p in parts)
    except ValueError:
        raise IngestError(row, f"bad timestamp {text!r}") from None
    if not (0 <= hours < 24 and 0 <= minutes < 60 and 0 <= seconds < 60 and 0 <= millis < 1000):
        raise IngestError(row, f"timestamp out of range: {text!r}")
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis


_DEPTH_SUFFIXES = ("st", "nd", "rd", "th")


def _parse_depth(text: str, row: int) -> int:
    cleaned = text.strip().lower()
    for suffix in _DEPTH_SUFFIXES:
        if cleaned.endswith(suffix):
            cleaned = cleaned[: -len(suffix)]
            break
    try:
        depth = int(cleaned)
    except ValueError:
        raise IngestError(row, f"bad depth {text!r}") from None
    if depth < 1:
        raise IngestError(row, f"depth must be positive, got {text!r}")
    return depth


def parse_event_row(row_values: Sequence[str], row: int) -> EventRecord:
    if len(row_values) != len(_HEADER):
        raise IngestError(row, f"expected {len(_HEADER)} columns, got {len(row_values)}")
    date_text, ts_text, market_text, event_text, direction_text, depth_text, price_text, volume_text = (
        value.strip() for value in row_values
    )
    try:
        day = _date.fromisoformat(date_text)
    except ValueError:
        raise IngestError(row, f"bad date {date_text!r}") from None
    try:
        event = EventKind(event_text)
    except ValueError:
        raise IngestError(row, f"bad event {event_text!r}") from None
    try:
        direction = Direction(direction_text)
    except ValueError:
        raise IngestError(row, f"bad direction {direction_text!r}") from None
    if event is EventKind.QUOTE and direction not in (Direction.BID, Direction.ASK):
        raise IngestError(row, f"quote rows need Bid/Ask direction, got {direction_text}")
    if event is EventKind.DEAL and direction not in (Direction.BUY, Direction.SELL):
        raise IngestError(row, f"deal rows need Buy/Sell direction, got {direction_text}")
    try:
        market = MarketId.parse(market_text)
    except ValueError as exc:
        raise IngestError(row, str(exc)) from None
    try:
        price = float(price_text)
    except ValueError:
        raise IngestError(row, f"bad price {price_text!r}") from None
    if not price > 0 or not math.isfinite(price):
        raise IngestError(row, f"price must be positive, got {price_text}")
    try:
        volume = int(volume_text)
    except ValueError:
        raise IngestError(row, f"bad volume {volume_text!r}") from None
    if volume < 1:
        raise IngestError(row, f"volume must be positive, got {volume_text}")
    return EventRecord(
        date=day,
        timestamp_ms=_parse_timestamp(ts_text, row),
        market=market,
        event=event,
        direction=direction,
        depth=_parse_depth(depth_text, row),
        price=price,
        volume=volume,
    )


def ingest_records(source: Union[str, Iterable[str]]) -> IngestResult:
    """Rebuild per-market mid series from tick records.

    Only depth-1 Quote rows move the reconstructed best bid/ask; Deal rows
    are validated for chronology and counted but never touch the mids.
    Grid points before a market's first two-sided quote are omitted, and
    each series is forward-filled out to the last record's timestamp.
    """
    lines = source.splitlines() if isinstance(source, str) else list(source)
    reader = csv.reader(lines)
    rows = list(reader)
    if not rows:
        return IngestResult(series={}, records=0, deal_rows=0)
    header = tuple(cell.strip() for cell in rows[0])
    if header != _HEADER:
        raise IngestError(1, f"header must be {','.join(_HEADER)}")

    best: Dict[MarketId, Dict[Direction, float]] = {m: {} for m in MarketId}
    updates: Dict[MarketId, List[Tuple[int, float]]] = {m: [] for m in MarketId}
    previous_key: Optional[Tuple[int, int]] = None
    last_grid_ms = None
    deal_rows = 0
    parsed = 0

    for index, values in enumerate(rows[1:], start=2):
        if not values or all(not cell.strip() for cell in values):
            continue
        record = parse_event_row(values, index)
        parsed += 1
        key = (record.date.toordinal(), record.timestamp_ms)
        if previous_key is not None and key < previous_key:
            raise IngestError(index, "timestamps are out of order")
        previous_key = key
        absolute_ms = record.date.toordinal() * 86_400_000 + record.timestamp_ms
        grid_ms = ((absolute_ms + GRID_MS // 2) // GRID_MS) * GRID_MS
        last_grid_ms = grid_ms
        if record.event is EventKind.DEAL:
            deal_rows += 1
            continue
        if record.depth != 1:
            continue
        book = best[record.market]
        book[record.direction] = record.price
        if Direction.BID in book and Direction.ASK in book:
            mid = (book[Direction.BID] + book[Direction.ASK]) / 2.0
            market_updates = updates[record.market]
            if market_updates and market_updates[-1][0] == grid_ms:
                market_updates[-1] = (grid_ms, mid)
            else:
                market_updates.append((grid_ms, mid))

    series: Dict[MarketId, MidSeries] = {}
    for market, market_updates in updates.items():
        if not market_updates or last_grid_ms is None:
            continue
        start_ms = market_updates[0][0]
        length = (last_grid_ms - start_ms) // GRID_MS + 1
        times = np.array([t for t, _ in market_updates], dtype=np.int64)
        values = np.array([v for _, v in market_updates])
        counts = np.diff(np.append((times - start_ms) // GRID_MS, length))
        series[market] = MidSeries(start_ms=int(start_ms), mids=np.repeat(values, counts))
    return IngestResult(series=series, records=parsed, deal_rows=deal_rows)


def align_mid_series(result: IngestResult) -> Tuple[int, Dict[MarketId, np.ndarray]]:
    """Crop ingested series to their common time window.

    Returns the window start (absolute ms) and equally long per-market arrays.
    """
    missing = [m.label for m in MarketId if m not in result.series]
    if missing:
        raise ValueError(f"missing markets: {', '.join(missing)}")
    start = max(s.start_ms for s in result.series.values())
    end = min(s.end_ms for s in result.series.values())
    if end < start:
        raise ValueError("series do not overlap")
    aligned = {}
    for market, mid_series in result.series.items():
        offset = (start - mid_series.start_ms) // GRID_MS
        count = (end - start) // GRID_MS + 1
        aligned[market] = mid_series.mids[offset : offset + count]
    return start, aligned


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def _format_price(value: float) -> str:
    return format(value, ".17g")


def export_artifacts(
    artifacts: RunArtifacts,
    directory: Union[str, Path],
    omega_grid: Optional[Sequence[float]] = None,
) -> List[Path]:
    """Write the five result files into ``directory``.

    Correlation scales that do not fit the series length are skipped.  All
    numeric formatting is fixed (17 significant digits for prices, 6 for
    correlations) so identical runs export byte-identical files.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    grid = DEFAULT_OMEGA_GRID if omega_grid is None else tuple(omega_grid)
    dt = artifacts.dt
    steps = artifacts.steps
    written: List[Path] = []

    mid_path = out / "mid_series.csv"
    with mid_path.open("w", newline="") as handle:
        handle.write("step,seconds,market,mid\n")
        for market in MarketId:
            label = market.label
            mids = artifacts.mid_series[market]
            handle.writelines(
                f"{step},{step * dt!r},{label},{_format_price(mids[step])}\n"
                for step in range(steps)
            )
    written.append(mid_path)

    corr_path = out / "correlations.csv"
    feasible = []
    for w in sorted(set(grid)):
        stride = w / dt
        k = int(round(stride))
        if k >= 1 and abs(stride - k) <= 1e-9 * max(1.0, stride) and steps >= 3 * k:
            feasible.append(w)
    with corr_path.open("w", newline="") as handle:
        handle.write("pair,omega_seconds,rho,sample_count\n")
        for pair in analytics.PAIR_ORDER:
            if not feasible:
                break
            curve = analytics.correlation_curve(artifacts, pair, feasible)
            pair_label = f"{pair[0].name}-{pair[1].name}"
            for omega, rho, count in zip(curve.omegas, curve.rhos, curve.sample_counts):
                handle.write(
                    f"{pair_label},{float(omega)!r},{format(rho, '.6g')},{count}\n"
                )
    written.append(corr_path)

    stats = analytics.config_stats(artifacts.config_timeline, dt)
    stats_payload = {
        "appearance_probability": {
            analytics.ALL_CONFIGS[code].compact: stats.appearance[code] for code in range(8)
        },
        "mean_lifetime_seconds": {
            analytics.ALL_CONFIGS[code].compact: (
                None if np.isnan(stats.mean_lifetime[code]) else stats.mean_lifetime[code]
            )
            for code in range(8)
        },
        "episode_count": {
            analytics.ALL_CONFIGS[code].compact: int(stats.episode_count[code])
            for code in range(8)
        },
        "transition_matrix": {
            analytics.ALL_CONFIGS[row].compact: {
                analytics.ALL_CONFIGS[col].compact: stats.transition_matrix[row, col]
                for col in range(8)
                if col != row
            }
            for row in range(8)
        },
        "same_state_probability": {
            f"{pair[0].name}-{pair[1].name}": analytics.same_state_probability(
                artifacts.config_timeline, pair
            )
            for pair in analytics.PAIR_ORDER
        },
    }
    stats_path = out / "config_stats.json"
    stats_path.write_text(json.dumps(stats_payload, indent=2, sort_keys=True) + "\n")
    written.append(stats_path)

    opp_path = out / "opportunities.csv"
    with opp_path.open("w", newline="") as handle:
        handle.write("step,kind,mu,config\n")
        handle.writelines(
            f"{rec.step_index},{rec.kind.value},{_format_price(rec.mu)},{rec.config.compact}\n"
            for rec in artifacts.opportunity_log
        )
    written.append(opp_path)

    manifest_path = out / "run_manifest.json"
    manifest_path.write_text(json.dumps(config_manifest(artifacts.config), indent=2, sort_keys=True) + "\n")
    written.append(manifest_path)
    return written


def load_mid_series(path: Union[str, Path]) -> Tuple[float, Dict[MarketId, np.ndarray]]:
    """Read a mid_series.csv back into per-market arrays; returns (dt, series)."""
    series: Dict[MarketId, List[float]] = {m: [] for m in MarketId}
    seconds: Dict[MarketId, List[float]] = {m: [] for m in MarketId}
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["step", "seconds", "market", "mid"]:
            raise ValueError(f"{path}: not a mid_series.csv file")
        for values in reader:
            if not values:
                continue
            market = MarketId.parse(values[2])
            seconds[market].append(float(values[1]))
            series[market].append(float(values[3]))
    lengths = {len(v) for v in series.values()}
    if lengths == {0}:
        raise ValueError(f"{path}: no data rows")
    if len(lengths) != 1:
        raise ValueError(f"{path}: markets have unequal lengths")
    some = next(iter(seconds.values()))
    if len(some) < 2:
        raise ValueError(f"{path}: need at least two steps to infer dt")
    dt = some[1] - some[0]
    return dt, {m: np.asarray(v) for m, v in series.items()}


# ---------------------------------------------------------------------------
# Synthetic fixture generation
# ---------------------------------------------------------------------------


def synth_records(
    seconds: float = 5.0,
    seed: int = 0,
    day: str = "2011-05-10",
    start: str = "09.00.00.000",
) -> str:
    """Generate a synthetic tick-record file in the ingestion format.

    Mid prices follow independent random walks; every 100 ms each market
    posts fresh depth-1 bid/ask quotes, with occasional deeper quotes and
    Deal rows mixed in to exercise the ingestion filters.
    """
    rng = np.random.default_rng(seed)
    start_ms = _parse_timestamp(start, 0)
    steps = int(round(seconds * 1000 / GRID_MS))
    decimals = {MarketId.EURUSD: 5, MarketId.USDJPY: 3, MarketId.EURJPY: 3}
    mids = {MarketId.EURUSD: 1.25, MarketId.USDJPY: 110.0, MarketId.EURJPY: 137.5}
    half_spreads = {MarketId.EURUSD: 0.00025, MarketId.USDJPY: 0.022, MarketId.EURJPY: 0.0275}
    scales = {MarketId.EURUSD: 0.0001, MarketId.USDJPY: 0.009, MarketId.EURJPY: 0.012}

    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_HEADER)

    def timestamp(ms: int) -> str:
        total = ms % 86_400_000
        hours, rest = divmod(total, 3_600_000)
        minutes, rest = divmod(rest, 60_000)
        secs, millis = divmod(rest, 1000)
        return f"{hours:02d}.{minutes:02d}.{secs:02d}.{millis:03d}"

    for step in range(steps):
        ts = timestamp(start_ms + step * GRID_MS)
        for market in MarketId:
            mids[market] += scales[market] * rng.standard_normal()
            mid = mids[market]
            digits = decimals[market]
            bid = round(mid - half_spreads[market], digits)
            ask = round(mid + half_spreads[market], digits)
            volume = int(rng.integers(1, 10))
            writer.writerow(
                [day, ts, market.label, "Quote", "Bid", "1st", f"{bid:.{digits}f}", volume]
            )
            writer.writerow(
                [day, ts, market.label, "Quote", "Ask", "1st", f"{ask:.{digits}f}", volume]
            )
            if rng.random() < 0.15:
                depth = int(rng.integers(2, 4))
                deep_bid = round(bid - depth * half_spreads[market], digits)
                writer.writerow(
                    [day, ts, market.label, "Quote", "Bid", f"{depth}{'nd' if depth == 2 else 'rd'}",
                     f"{deep_bid:.{digits}f}", volume]
                )
            if rng.random() < 0.1:
                side = "Buy" if rng.random() < 0.5 else "Sell"
                price = ask if side == "Buy" else bid
                writer.writerow(
                    [day, ts, market.label, "Deal", side, "1st", f"{price:.{digits}f}", volume]
                )
    return buffer.getvalue()
