"""Market-maker quote mechanics and intra-market matching.

Each market is a one-quote-pair-per-maker book on a continuous price grid:
maker ``i`` holds a dealing price ``z_i`` and posts ``bid = z_i - L/2``,
``ask = z_i + L/2`` with the market-wide constant spread ``L``.  Crossings
(best bid >= best ask) are settled at the midpoint of the two matched
quotes; the matched makers (or, in dealer mode, the whole market) re-anchor
their dealing prices to the settlement price.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np


class MarketId(IntEnum):
    """The three markets of the currency triangle (EURJPY is the cross)."""

    EURUSD = 0
    USDJPY = 1
    EURJPY = 2

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "MarketId":
        key = text.strip().upper().replace("/", "")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown market {text!r}") from None


_LABELS = {
    MarketId.EURUSD: "EUR/USD",
    MarketId.USDJPY: "USD/JPY",
    MarketId.EURJPY: "EUR/JPY",
}

#: Markets whose product implies the cross rate: EUR/JPY = USD/JPY x EUR/USD.
LEG_MARKETS = (MarketId.EURUSD, MarketId.USDJPY)
CROSS_MARKET = MarketId.EURJPY


class Variant(Enum):
    """Post-trade update breadth: matched pair only, or the whole market."""

    ARBITRAGER = "arbitrager"
    DEALER = "dealer"


class TransactionKind(Enum):
    MAKER_MAKER = "maker_maker"
    PREDATORY_BUY = "predatory_buy"
    PREDATORY_SELL = "predatory_sell"


@dataclass(frozen=True, slots=True)
class Transaction:
    market: MarketId
    step_index: int
    price: float
    buyer_id: int
    seller_id: int
    kind: TransactionKind


@dataclass(slots=True)
class MarketMakerState:
    """One maker's dealing price and spread in one market.

    ``quote_override`` temporarily replaces the symmetric quotes around the
    dealing price (used by the pegging behavior of the extended model); it
    lives for a single engine step.
    """

    agent_id: int
    market: MarketId
    dealing_price: float
    spread: float
    quote_override: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if self.spread <= 0:
            raise ValueError("spread must be positive")
        if self.quote_override is not None:
            ob, oa = self.quote_override
            if not ob < oa:
                raise ValueError("override bid must be below override ask")


class BestQuotes(NamedTuple):
    bid: float
    ask: float
    mid: float
    spread: float


class UnresolvedCrossingError(RuntimeError):
    """A crossed book survived the settlement cap: a logic bug, not a market state."""


class MarketState:
    """All makers of one market plus its transaction history.

    Dealing prices are held in a dense float array so the simulation engine
    can update every maker with vector arithmetic.  ``maker()`` /
    ``set_maker()`` convert to and from :class:`MarketMakerState` snapshots
    at the boundary.  Mutation is single-threaded by contract.
    """

    __slots__ = (
        "market",
        "spread",
        "dealing_prices",
        "prices",
        "changes",
        "_override_bid",
        "_override_ask",
        "_override_on",
        "override_count",
    )

    def __init__(
        self,
        market: MarketId,
        dealing_prices: Sequence[float],
        spread: float,
        trend_window: int = 15,
    ) -> None:
        if spread <= 0:
            raise ValueError("spread must be positive")
        self.market = market
        self.spread = float(spread)
        self.dealing_prices = np.array(dealing_prices, dtype=float)
        n = self.dealing_prices.size
        self.prices: list[float] = []
        self.changes: deque[float] = deque(maxlen=int(trend_window))
        self._override_bid = np.full(n, np.nan)
        self._override_ask = np.full(n, np.nan)
        self._override_on = np.zeros(n, dtype=bool)
        self.override_count = 0

    @property
    def maker_count(self) -> int:
        return self.dealing_prices.size

    @property
    def transaction_count(self) -> int:
        """Number of transactions so far; equals the history length."""
        return len(self.prices)

    def maker(self, agent_id: int) -> MarketMakerState:
        """Snapshot one maker; write changes back with :meth:`set_maker`."""
        override = None
        if self._override_on[agent_id]:
            override = (float(self._override_bid[agent_id]), float(self._override_ask[agent_id]))
        return MarketMakerState(
            agent_id=agent_id,
            market=self.market,
            dealing_price=float(self.dealing_prices[agent_id]),
            spread=self.spread,
            quote_override=override,
        )

    def makers(self) -> list[MarketMakerState]:
        return [self.maker(i) for i in range(self.maker_count)]

    def set_maker(self, mm: MarketMakerState) -> None:
        self.dealing_prices[mm.agent_id] = mm.dealing_price
        if mm.quote_override is None:
            self.clear_override(mm.agent_id)
        else:
            self.set_override(mm.agent_id, *mm.quote_override)

    def set_override(self, agent_id: int, bid: float, ask: float) -> None:
        if not bid < ask:
            raise ValueError("override bid must be below override ask")
        if not self._override_on[agent_id]:
            self.override_count += 1
            self._override_on[agent_id] = True
        self._override_bid[agent_id] = bid
        self._override_ask[agent_id] = ask

    def clear_override(self, agent_id: int) -> None:
        if self._override_on[agent_id]:
            self._override_on[agent_id] = False
            self._override_bid[agent_id] = np.nan
            self._override_ask[agent_id] = np.nan
            self.override_count -= 1

    def retain_overrides(self, keep: Optional[np.ndarray]) -> None:
        """Clear every quote override except the given maker indices."""
        if self.override_count == 0:
            return
        keep_mask = np.zeros(self.maker_count, dtype=bool)
        if keep is not None:
            keep_mask[keep] = True
        drop = self._override_on & ~keep_mask
        if drop.any():
            self._override_on[drop] = False
            self._override_bid[drop] = np.nan
            self._override_ask[drop] = np.nan
            self.override_count = int(self._override_on.sum())

    def bid_quotes(self) -> np.ndarray:
        half = 0.5 * self.spread
        bids = self.dealing_prices - half
        if self.override_count:
            bids = np.where(self._override_on, self._override_bid, bids)
        return bids

    def ask_quotes(self) -> np.ndarray:
        half = 0.5 * self.spread
        asks = self.dealing_prices + half
        if self.override_count:
            asks = np.where(self._override_on, self._override_ask, asks)
        return asks

    def record_price(self, price: float) -> None:
        """Append a transaction price and track its change for the trend."""
        if self.prices:
            self.changes.append(price - self.prices[-1])
        self.prices.append(price)

    def __repr__(self) -> str:
        return (
            f"<MarketState {self.market.label} makers={self.maker_count} "
            f"transactions={self.transaction_count}>"
        )


def quotes(mm: MarketMakerState) -> Tuple[float, float]:
    """Current (bid, ask) of one maker; the override pair wins when present."""
    if mm.quote_override is not None:
        return mm.quote_override
    half = 0.5 * mm.spread
    return mm.dealing_price - half, mm.dealing_price + half


def apply_dealing_update(
    mm: MarketMakerState,
    trend: float,
    noise: float,
    dt: float,
    trend_strength: float,
    volatility: float,
) -> float:
    """Advance a maker's dealing price one step of the trend-plus-noise walk.

    The new price is ``z + trend_strength * trend * dt + volatility *
    sqrt(dt) * noise``.  Any quote override is cleared: overrides only ever
    live until the maker's next regular update.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if volatility < 0:
        raise ValueError("volatility must be non-negative")
    new_price = mm.dealing_price + trend_strength * trend * dt + volatility * np.sqrt(dt) * noise
    mm.dealing_price = float(new_price)
    mm.quote_override = None
    return mm.dealing_price


def best_quotes(market: MarketState) -> BestQuotes:
    """Market-wide best bid/ask with mid and spread.

    Crossed books are reported faithfully (negative spread); the engine
    resolves matching before mid prices are recorded.
    """
    if market.maker_count == 0:
        raise ValueError("no makers")
    if market.override_count:
        bid = float(market.bid_quotes().max())
        ask = float(market.ask_quotes().min())
    else:
        half = 0.5 * market.spread
        prices = market.dealing_prices
        bid = float(prices.max()) - half
        ask = float(prices.min()) + half
    return BestQuotes(bid, ask, (ask + bid) / 2.0, ask - bid)


def match_and_settle(
    market: MarketState,
    mode: Variant = Variant.ARBITRAGER,
    step: int = 0,
) -> list[Transaction]:
    """Resolve all crossings in one market, best bid against best ask.

    Each settlement happens at the midpoint of the matched quotes.  In
    arbitrager mode only the two matched makers re-anchor to the settlement
    price; in dealer mode the entire market does.  Ties on identical quotes
    go to the lowest agent id (argmax/argmin pick the first occurrence).
    Settlements are capped at the maker count; a crossing that survives the
    cap raises :class:`UnresolvedCrossingError`.
    """
    transactions: list[Transaction] = []
    z = market.dealing_prices
    cap = market.maker_count
    for _ in range(cap + 1):
        bids = market.bid_quotes()
        asks = market.ask_quotes()
        buyer = int(np.argmax(bids))
        seller = int(np.argmin(asks))
        # Self-matching cannot occur: a single maker's bid sits below its own
        # ask by construction.  Guarded anyway so a malformed state cannot loop.
        if bids[buyer] < asks[seller] or buyer == seller:
            return transactions
        if len(transactions) == cap:
            break
        price = (asks[seller] + bids[buyer]) / 2.0
        if mode is Variant.DEALER:
            z[:] = price
        else:
            z[buyer] = price
            z[seller] = price
        market.clear_override(buyer)
        market.clear_override(seller)
        market.record_price(price)
        transactions.append(
            Transaction(market.market, step, price, buyer, seller, TransactionKind.MAKER_MAKER)
        )
    raise UnresolvedCrossingError(
        f"{market.market.label}: crossing persists after {cap} settlements"
    )
