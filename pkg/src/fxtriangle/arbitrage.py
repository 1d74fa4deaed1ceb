"""Triangular arbitrage detection and the arbitrager's predatory orders.

A type-1 opportunity exists when selling the two leg rates at their best
bids beats buying the cross rate at its best ask; type-2 is the reverse
round trip.  The baseline arbitrager strikes whenever a ratio exceeds one;
the extended model adds exponential risk thresholds, maker-side exposure
monitoring with defensive resets, and probabilistic pegging of cross-market
quotes to the implied rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from .lob import (
    BestQuotes,
    MarketId,
    MarketMakerState,
    MarketState,
    Transaction,
    TransactionKind,
    quotes,
)
from .trend import EcologyConfig

#: Agent id used for the arbitrager in transaction records.
ARBITRAGER_ID = -1

#: Cap on predatory executions within a single step before the engine
#: declares non-progress.
MAX_EXECUTIONS_PER_STEP = 10


class OpportunityKind(Enum):
    TYPE_I = "type_I"
    TYPE_II = "type_II"


@dataclass(frozen=True, slots=True)
class OpportunityRecord:
    """One detected opportunity: its ratio, whether it was exploited, and
    the ecology configuration it emerged in."""

    step_index: int
    kind: OpportunityKind
    mu: float
    exploited: bool
    config: EcologyConfig


@dataclass(frozen=True)
class RiskProfile:
    """Extended-model behavior scales.

    ``arb_scale`` and ``maker_scale`` are the means of the exponential risk
    thresholds drawn by the arbitrager and the makers (zero degenerates to a
    threshold of exactly one); ``peg_probability`` is the per-step chance
    that a cross-market maker pegs its quotes to the implied best prices.
    """

    arb_scale: float = 0.0
    maker_scale: Union[float, Tuple[float, float, float]] = 0.0
    peg_probability: float = 0.0

    def __post_init__(self) -> None:
        scale = self.maker_scale
        if not isinstance(scale, tuple):
            scale = (float(scale),) * 3
        else:
            scale = tuple(float(s) for s in scale)
            if len(scale) != 3:
                raise ValueError("maker_scale needs one value per market")
        object.__setattr__(self, "maker_scale", scale)
        if self.arb_scale < 0 or any(s < 0 for s in scale):
            raise ValueError("risk scales must be non-negative")
        if not 0.0 <= self.peg_probability <= 1.0:
            raise ValueError("peg_probability must be in [0, 1]")


def _check_positive(*prices: float) -> None:
    for price in prices:
        if not price > 0:
            raise ValueError("invalid quote")


def arb_ratio_type1(bid_eurusd: float, bid_usdjpy: float, ask_eurjpy: float) -> float:
    """Proceeds of selling the legs at their bids per unit bought of the
    cross at its ask; above one signals a type-1 opportunity."""
    _check_positive(bid_eurusd, bid_usdjpy, ask_eurjpy)
    return bid_eurusd * bid_usdjpy / ask_eurjpy


def arb_ratio_type2(bid_eurjpy: float, ask_eurusd: float, ask_usdjpy: float) -> float:
    """Proceeds of selling the cross at its bid per unit paid buying the
    legs at their asks; above one signals a type-2 opportunity."""
    _check_positive(bid_eurjpy, ask_eurusd, ask_usdjpy)
    return bid_eurjpy / (ask_eurusd * ask_usdjpy)


def detect_opportunity(
    ratio1: float,
    ratio2: float,
    threshold: float = 0.0,
) -> Optional[OpportunityKind]:
    """Classify the current quotes; ``threshold`` is the extra margin the
    extended arbitrager demands on top of parity."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    if ratio1 > 1.0 + threshold:
        return OpportunityKind.TYPE_I
    if ratio2 > 1.0 + threshold:
        return OpportunityKind.TYPE_II
    return None


def draw_risk_threshold(scale: float, rng: np.random.Generator) -> float:
    """Exponential threshold with mean ``scale``; zero scale draws nothing."""
    if scale < 0:
        raise ValueError("scale must be non-negative")
    if scale == 0.0:
        return 0.0
    return scale * float(rng.standard_exponential())


def _predatory_buy(market: MarketState, step: int) -> Transaction:
    # The arbitrager lifts the best ask; the matched maker re-anchors to it.
    asks = market.ask_quotes()
    seller = int(np.argmin(asks))
    price = float(asks[seller])
    market.dealing_prices[seller] = price
    market.clear_override(seller)
    market.record_price(price)
    return Transaction(
        market.market, step, price, ARBITRAGER_ID, seller, TransactionKind.PREDATORY_BUY
    )


def _predatory_sell(market: MarketState, step: int) -> Transaction:
    bids = market.bid_quotes()
    buyer = int(np.argmax(bids))
    price = float(bids[buyer])
    market.dealing_prices[buyer] = price
    market.clear_override(buyer)
    market.record_price(price)
    return Transaction(
        market.market, step, price, buyer, ARBITRAGER_ID, TransactionKind.PREDATORY_SELL
    )


def execute_predatory(
    markets: Mapping[MarketId, MarketState],
    kind: OpportunityKind,
    step: int = 0,
) -> list[Transaction]:
    """Fire the three simultaneous market orders that exploit an opportunity.

    Type 1 buys the cross at its best ask and sells both legs at their best
    bids; type 2 is the mirror image.  Every matched maker re-anchors its
    dealing price to its own matched quote, and each settlement price enters
    that market's transaction history (so predation perturbs the trends).
    """
    cross = markets[MarketId.EURJPY]
    eurusd = markets[MarketId.EURUSD]
    usdjpy = markets[MarketId.USDJPY]
    if kind is OpportunityKind.TYPE_I:
        return [
            _predatory_buy(cross, step),
            _predatory_sell(eurusd, step),
            _predatory_sell(usdjpy, step),
        ]
    return [
        _predatory_sell(cross, step),
        _predatory_buy(eurusd, step),
        _predatory_buy(usdjpy, step),
    ]


def exposure_ratios(
    mm: MarketMakerState,
    best: Mapping[MarketId, BestQuotes],
) -> Tuple[float, float]:
    """A maker's exposure to type-1 and type-2 predatory orders.

    Each ratio isolates the maker's own quote on the vulnerable side and
    fills in the other two markets' best quotes, so within a market the
    best-quote maker always carries the largest exposure of its side.
    """
    bid, ask = quotes(mm)
    _check_positive(bid, ask)
    if mm.market is MarketId.EURJPY:
        legs_bid = best[MarketId.USDJPY].bid * best[MarketId.EURUSD].bid
        legs_ask = best[MarketId.USDJPY].ask * best[MarketId.EURUSD].ask
        _check_positive(legs_bid, legs_ask)
        return legs_bid / ask, bid / legs_ask
    if mm.market is MarketId.USDJPY:
        other = best[MarketId.EURUSD]
    else:
        other = best[MarketId.USDJPY]
    cross = best[MarketId.EURJPY]
    _check_positive(other.bid, other.ask, cross.bid, cross.ask)
    return bid * other.bid / cross.ask, cross.bid / (ask * other.ask)


def defensive_reset(mm: MarketMakerState, mid: float) -> MarketMakerState:
    """Re-quote around the market mid instead of taking the regular update.

    ``mid`` must be the mid of the best quotes before any resets fired this
    step; all triggered makers reset against that same snapshot.
    """
    mm.dealing_price = float(mid)
    mm.quote_override = None
    return mm


def peg_to_implied(
    mm: MarketMakerState,
    best_eurusd: BestQuotes,
    best_usdjpy: BestQuotes,
) -> MarketMakerState:
    """Peg a cross-market maker's quotes to the implied best bid and ask."""
    if mm.market is not MarketId.EURJPY:
        raise ValueError("only EUR/JPY makers peg to the implied rate")
    mm.quote_override = (
        best_eurusd.bid * best_usdjpy.bid,
        best_eurusd.ask * best_usdjpy.ask,
    )
    return mm
