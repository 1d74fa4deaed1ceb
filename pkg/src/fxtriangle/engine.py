"""Discrete-time simulation loop for the three-market ecology.

Each step runs six phases: (1) refresh trends and market states from the
transaction history through the previous step, (2) extended model only:
pegging draws and exposure-triggered defensive resets, (3) dealing-price
updates with fresh Gaussian draws, (4) per-market crossing resolution,
(5) the arbitrager's detect/execute loop, (6) recording of mids, trends
and the ecology configuration.

Runs are deterministic under (config, seed).  Every maker owns private RNG
substreams spawned from the master seed (one for noise, one for risk
thresholds, one for pegging), and the arbitrager owns its own, so toggling
the arbitrager or the extended behaviors never perturbs maker noise.
Draws are consumed in fixed-size blocks purely as an optimization; block
boundaries never depend on market events.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .arbitrage import (
    MAX_EXECUTIONS_PER_STEP,
    OpportunityKind,
    OpportunityRecord,
    RiskProfile,
    arb_ratio_type1,
    arb_ratio_type2,
    detect_opportunity,
    execute_predatory,
)
from .calibration import CalibrationParams, default_parameters, sample_initial_dealing_price
from .lob import MarketId, MarketState, Transaction, Variant, match_and_settle
from .trend import ALL_CONFIGS, TrendConfig, TrendScheme, trend_exponential, trend_linear

_BLOCK = 2048


class ArbitrageLoopError(RuntimeError):
    """The arbitrager kept finding opportunities past the per-step cap."""


@dataclass(frozen=True)
class SimulationConfig:
    steps: int
    seed: int
    calibration: CalibrationParams = field(default_factory=default_parameters)
    trend: TrendConfig = field(default_factory=TrendConfig)
    arbitrager_enabled: bool = True
    extended: Optional[RiskProfile] = None
    variant: Variant = Variant.ARBITRAGER

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if any(n < 2 for n in self.calibration.makers):
            raise ValueError("N must be >= 2 in every market")


@dataclass
class RunArtifacts:
    """Everything one run leaves behind for the analytics layer.

    ``mid_series`` and ``trend_series`` carry one value per step (the step
    index is the array index); ``config_timeline`` holds the per-step
    ecology configuration codes.
    """

    config: SimulationConfig
    mid_series: Dict[MarketId, np.ndarray]
    trend_series: Dict[MarketId, np.ndarray]
    config_timeline: np.ndarray
    transaction_log: List[Transaction]
    opportunity_log: List[OpportunityRecord]

    @property
    def steps(self) -> int:
        return int(self.config_timeline.size)

    @property
    def dt(self) -> float:
        return self.config.calibration.dt


class _MarketRuntime:
    """Per-market mutable state plus its RNG blocks and cached best quotes."""

    __slots__ = (
        "state",
        "half",
        "drift_coeff",
        "sigma_sqrt_dt",
        "phi",
        "nu",
        "seen_transactions",
        "best_bid",
        "best_ask",
        "skip",
        "_noise_gens",
        "_risk_gens",
        "_peg_gens",
        "_eps",
        "_eps_ptr",
        "_risk_scale",
        "_risk_block",
        "_risk_ptr",
        "_peg_block",
        "_peg_ptr",
    )

    def __init__(
        self,
        market: MarketId,
        config: SimulationConfig,
        seed_seq: np.random.SeedSequence,
    ) -> None:
        cal = config.calibration
        count = cal.makers[int(market)]
        spread = cal.spread[int(market)]
        center = cal.center[int(market)]
        maker_seqs = seed_seq.spawn(count)
        self._noise_gens = []
        self._risk_gens = []
        self._peg_gens = []
        for seq in maker_seqs:
            noise_seq, risk_seq, peg_seq = seq.spawn(3)
            self._noise_gens.append(np.random.default_rng(noise_seq))
            self._risk_gens.append(np.random.default_rng(risk_seq))
            self._peg_gens.append(np.random.default_rng(peg_seq))

        initial = np.empty(count)
        for i, gen in enumerate(self._noise_gens):
            u = gen.uniform()
            while u == 0.0:
                u = gen.uniform()
            initial[i] = sample_initial_dealing_price(u, spread, center)
        self.state = MarketState(market, initial, spread, trend_window=config.trend.window)

        self.half = 0.5 * spread
        self.drift_coeff = cal.trend_strength[int(market)] * cal.dt
        self.sigma_sqrt_dt = cal.volatility[int(market)] * np.sqrt(cal.dt)
        self.phi = 0.0
        self.nu = 1
        self.seen_transactions = 0
        self.best_bid = 0.0
        self.best_ask = 0.0
        self.skip: Optional[np.ndarray] = None

        self._eps = np.empty((_BLOCK, count))
        self._eps_ptr = _BLOCK
        ext = config.extended
        self._risk_scale = ext.maker_scale[int(market)] if ext is not None else 0.0
        self._risk_block = None
        self._risk_ptr = _BLOCK
        self._peg_block = None
        self._peg_ptr = _BLOCK

    def next_noise_row(self) -> np.ndarray:
        if self._eps_ptr == _BLOCK:
            for i, gen in enumerate(self._noise_gens):
                self._eps[:, i] = gen.standard_normal(_BLOCK)
            self._eps *= self.sigma_sqrt_dt
            self._eps_ptr = 0
        row = self._eps[self._eps_ptr]
        self._eps_ptr += 1
        return row

    def next_risk_row(self) -> np.ndarray:
        """Per-maker exponential threshold draws, pre-scaled by the risk mean."""
        if self._risk_ptr == _BLOCK:
            if self._risk_block is None:
                self._risk_block = np.empty((_BLOCK, self.state.maker_count))
            for i, gen in enumerate(self._risk_gens):
                self._risk_block[:, i] = gen.standard_exponential(_BLOCK)
            self._risk_block *= self._risk_scale
            self._risk_ptr = 0
        row = self._risk_block[self._risk_ptr]
        self._risk_ptr += 1
        return row

    def next_peg_row(self) -> np.ndarray:
        if self._peg_ptr == _BLOCK:
            if self._peg_block is None:
                self._peg_block = np.empty((_BLOCK, self.state.maker_count))
            for i, gen in enumerate(self._peg_gens):
                self._peg_block[:, i] = gen.random(_BLOCK)
            self._peg_ptr = 0
        row = self._peg_block[self._peg_ptr]
        self._peg_ptr += 1
        return row

    def refresh_best(self) -> None:
        state = self.state
        if state.override_count:
            self.best_bid = float(state.bid_quotes().max())
            self.best_ask = float(state.ask_quotes().min())
        else:
            z = state.dealing_prices
            self.best_bid = float(z.max()) - self.half
            self.best_ask = float(z.min()) + self.half


class Simulation:
    """One seeded realization of the model; advance with :meth:`step`."""

    def __init__(self, config: SimulationConfig) -> None:
        self._config = config
        master = np.random.SeedSequence(config.seed)
        eurusd_seq, usdjpy_seq, eurjpy_seq, arb_seq = master.spawn(4)
        self._markets = [
            _MarketRuntime(MarketId.EURUSD, config, eurusd_seq),
            _MarketRuntime(MarketId.USDJPY, config, usdjpy_seq),
            _MarketRuntime(MarketId.EURJPY, config, eurjpy_seq),
        ]
        self._arb_gen = np.random.default_rng(arb_seq)
        self._arb_block: Optional[np.ndarray] = None
        self._arb_ptr = _BLOCK

        if config.trend.scheme is TrendScheme.EXPONENTIAL:
            window, decay = config.trend.window, config.trend.decay
            self._trend_fn = lambda changes: trend_exponential(changes, window, decay)
        else:
            window = config.trend.window
            self._trend_fn = lambda changes: trend_linear(changes, window)

        steps = config.steps
        self._mids = [np.empty(steps) for _ in range(3)]
        self._trends = [np.empty(steps) for _ in range(3)]
        self._timeline = np.empty(steps, dtype=np.uint8)
        self._transactions: List[Transaction] = []
        self._opportunities: List[OpportunityRecord] = []
        self._current_step = 0

    @property
    def config(self) -> SimulationConfig:
        return self._config

    @property
    def current_step(self) -> int:
        return self._current_step

    @property
    def states(self) -> Dict[MarketId, MarketState]:
        return {mr.state.market: mr.state for mr in self._markets}

    def _next_arb_threshold(self) -> float:
        if self._arb_ptr == _BLOCK:
            if self._arb_block is None:
                self._arb_block = np.empty(_BLOCK)
            self._arb_block[:] = self._arb_gen.standard_exponential(_BLOCK)
            self._arb_block *= self._config.extended.arb_scale
            self._arb_ptr = 0
        value = float(self._arb_block[self._arb_ptr])
        self._arb_ptr += 1
        return value

    def _extended_phase(self) -> None:
        ext = self._config.extended
        eurusd, usdjpy, eurjpy = self._markets
        for runtime in self._markets:
            runtime.refresh_best()

        pegged: Optional[np.ndarray] = None
        if ext.peg_probability > 0.0:
            draws = eurjpy.next_peg_row()
            mask = draws < ext.peg_probability
            if mask.any():
                pegged = np.nonzero(mask)[0]
                implied_bid = eurusd.best_bid * usdjpy.best_bid
                implied_ask = eurusd.best_ask * usdjpy.best_ask
                for idx in pegged:
                    eurjpy.state.set_override(int(idx), implied_bid, implied_ask)
                eurjpy.refresh_best()

        # Exposure is evaluated simultaneously for every maker against the
        # post-pegging, pre-reset quotes; makers that pegged sit this one out.
        # The best-quote maker always carries the maximal exposure of its
        # side, so when even that maker sits at or below parity nothing can
        # exceed 1 + threshold and the per-maker evaluation (including its
        # threshold draws) is skipped outright.
        reset_sets: List[Optional[np.ndarray]] = []
        for runtime in self._markets:
            state = runtime.state
            if runtime is eurjpy:
                peak1 = (usdjpy.best_bid * eurusd.best_bid) / runtime.best_ask
                peak2 = runtime.best_bid / (usdjpy.best_ask * eurusd.best_ask)
            elif runtime is usdjpy:
                peak1 = (runtime.best_bid * eurusd.best_bid) / eurjpy.best_ask
                peak2 = eurjpy.best_bid / (runtime.best_ask * eurusd.best_ask)
            else:
                peak1 = (runtime.best_bid * usdjpy.best_bid) / eurjpy.best_ask
                peak2 = eurjpy.best_bid / (runtime.best_ask * usdjpy.best_ask)
            if peak1 <= 1.0 and peak2 <= 1.0:
                reset_sets.append(None)
                continue
            bids = state.bid_quotes()
            asks = state.ask_quotes()
            if runtime is eurjpy:
                chi1 = (usdjpy.best_bid * eurusd.best_bid) / asks
                chi2 = bids / (usdjpy.best_ask * eurusd.best_ask)
            elif runtime is usdjpy:
                chi1 = (bids * eurusd.best_bid) / eurjpy.best_ask
                chi2 = eurjpy.best_bid / (asks * eurusd.best_ask)
            else:
                chi1 = (bids * usdjpy.best_bid) / eurjpy.best_ask
                chi2 = eurjpy.best_bid / (asks * usdjpy.best_ask)
            if runtime._risk_scale > 0.0:
                bar = 1.0 + runtime.next_risk_row()
                triggered = (chi1 > bar) | (chi2 > bar)
            else:
                triggered = (chi1 > 1.0) | (chi2 > 1.0)
            if runtime is eurjpy and pegged is not None:
                triggered[pegged] = False
            reset_sets.append(np.nonzero(triggered)[0] if triggered.any() else None)

        for runtime, resets in zip(self._markets, reset_sets):
            if resets is None:
                runtime.skip = pegged if runtime is eurjpy else None
                continue
            mid = (runtime.best_ask + runtime.best_bid) / 2.0
            runtime.state.dealing_prices[resets] = mid
            for idx in resets:
                runtime.state.clear_override(int(idx))
            if runtime is eurjpy and pegged is not None:
                runtime.skip = np.union1d(pegged, resets)
            else:
                runtime.skip = resets

    def step(self) -> None:
        """Advance the simulation by one step."""
        if self._current_step >= self._config.steps:
            raise RuntimeError("simulation already complete")
        self._advance()

    def _advance(self) -> None:
        config = self._config
        step_index = self._current_step
        markets = self._markets
        extended = config.extended is not None

        # (1) trends from history through the end of the previous step
        code = 0
        for runtime in markets:
            state = runtime.state
            if state.transaction_count != runtime.seen_transactions:
                runtime.phi = self._trend_fn(tuple(reversed(state.changes)))
                runtime.seen_transactions = state.transaction_count
            phi = runtime.phi
            if phi > 0.0:
                runtime.nu = 1
            elif phi < 0.0:
                runtime.nu = -1
            code = (code << 1) | (runtime.nu > 0)

        # (2) extended-model maker behaviors
        if extended:
            self._extended_phase()

        # (3) dealing-price updates; one Gaussian per maker per step, drawn
        # even for makers that pegged or reset, to keep streams aligned.
        # Updating clears a maker's override, so only overrides set this
        # step (pegged makers, all in the skip set) survive the phase.
        for runtime in markets:
            row = runtime.next_noise_row()
            state = runtime.state
            z = state.dealing_prices
            skip = runtime.skip if extended else None
            if extended and state.override_count:
                state.retain_overrides(skip)
            drift = runtime.drift_coeff * runtime.phi
            if skip is None:
                if drift != 0.0:
                    np.add(z, drift, out=z)
                np.add(z, row, out=z)
            else:
                if drift != 0.0:
                    drift_vec = np.full(z.size, drift)
                    drift_vec[skip] = 0.0
                    np.add(z, drift_vec, out=z)
                masked = row.copy()
                masked[skip] = 0.0
                np.add(z, masked, out=z)
                runtime.skip = None

        # (4) crossing resolution, then cache best quotes
        variant = config.variant
        for runtime in markets:
            state = runtime.state
            if state.override_count == 0:
                z = state.dealing_prices
                bid = float(z.max()) - runtime.half
                ask = float(z.min()) + runtime.half
                if bid >= ask:
                    self._transactions.extend(match_and_settle(state, variant, step_index))
                    bid = float(z.max()) - runtime.half
                    ask = float(z.min()) + runtime.half
                runtime.best_bid = bid
                runtime.best_ask = ask
            else:
                bid = float(state.bid_quotes().max())
                ask = float(state.ask_quotes().min())
                if bid >= ask:
                    self._transactions.extend(match_and_settle(state, variant, step_index))
                    runtime.refresh_best()
                else:
                    runtime.best_bid = bid
                    runtime.best_ask = ask

        # (5) arbitrager loop: detect, execute, re-detect
        if config.arbitrager_enabled:
            eurusd, usdjpy, eurjpy = markets
            threshold = 0.0
            if extended and config.extended.arb_scale > 0.0:
                threshold = self._next_arb_threshold()
            executions = 0
            while True:
                ratio1 = arb_ratio_type1(eurusd.best_bid, usdjpy.best_bid, eurjpy.best_ask)
                ratio2 = arb_ratio_type2(eurjpy.best_bid, eurusd.best_ask, usdjpy.best_ask)
                kind = detect_opportunity(ratio1, ratio2)
                if kind is None:
                    break
                mu = ratio1 if kind is OpportunityKind.TYPE_I else ratio2
                exploited = threshold == 0.0 or detect_opportunity(ratio1, ratio2, threshold) is not None
                self._opportunities.append(
                    OpportunityRecord(step_index, kind, mu, exploited, ALL_CONFIGS[code])
                )
                if not exploited:
                    break
                if executions == MAX_EXECUTIONS_PER_STEP:
                    raise ArbitrageLoopError(
                        f"step {step_index}: opportunity persists after "
                        f"{MAX_EXECUTIONS_PER_STEP} predatory executions"
                    )
                self._transactions.extend(execute_predatory(self.states, kind, step_index))
                executions += 1
                for runtime in markets:
                    runtime.refresh_best()

        # (6) record mids, trends, configuration
        for slot, runtime in enumerate(markets):
            bid = runtime.best_bid
            ask = runtime.best_ask
            if bid >= ask:
                raise RuntimeError("book crossed at sampling time")
            self._mids[slot][step_index] = (ask + bid) / 2.0
            self._trends[slot][step_index] = runtime.phi
        self._timeline[step_index] = code
        self._current_step = step_index + 1

    def run(self) -> RunArtifacts:
        """Run every remaining step and return the artifacts."""
        advance = self._advance
        while self._current_step < self._config.steps:
            advance()
        return self.artifacts()

    def artifacts(self) -> RunArtifacts:
        """Artifacts for the steps simulated so far."""
        upto = self._current_step
        complete = upto == self._config.steps
        mids = {}
        trends = {}
        for slot, runtime in enumerate(self._markets):
            market = runtime.state.market
            mids[market] = self._mids[slot] if complete else self._mids[slot][:upto].copy()
            trends[market] = self._trends[slot] if complete else self._trends[slot][:upto].copy()
        return RunArtifacts(
            config=self._config,
            mid_series=mids,
            trend_series=trends,
            config_timeline=self._timeline if complete else self._timeline[:upto].copy(),
            transaction_log=list(self._transactions),
            opportunity_log=list(self._opportunities),
        )


def run(config: SimulationConfig) -> RunArtifacts:
    """Simulate one full run for the given configuration."""
    return Simulation(config).run()


def _run_with_seed(config: SimulationConfig, seed: int) -> RunArtifacts:
    return run(replace(config, seed=seed))


def run_ensemble(
    config: SimulationConfig,
    seeds: Sequence[int],
    max_workers: Optional[int] = None,
) -> List[RunArtifacts]:
    """Independent runs of the same configuration under each seed.

    Results are ordered like ``seeds`` and identical whether executed
    serially or in parallel; a failing run aborts the ensemble with the
    offending seed named.
    """
    seed_list = [int(s) for s in seeds]
    if not seed_list:
        raise ValueError("seeds must be non-empty")
    if max_workers is not None and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(_run_with_seed, config, s) for s in seed_list]
            results = []
            for seed, future in zip(seed_list, futures):
                try:
                    results.append(future.result())
                except Exception as exc:
                    raise RuntimeError(f"ensemble run with seed {seed} failed: {exc}") from exc
        return results
    results = []
    for seed in seed_list:
        try:
            results.append(_run_with_seed(config, seed))
        except Exception as exc:
            raise RuntimeError(f"ensemble run with seed {seed} failed: {exc}") from exc
    return results
