"""Agent-based simulator of three coupled FX markets with a triangular
arbitrager, plus the statistics used to study cross-currency correlations
and market-state ecology."""

from .arbitrage import (
    ARBITRAGER_ID,
    OpportunityKind,
    OpportunityRecord,
    RiskProfile,
    arb_ratio_type1,
    arb_ratio_type2,
    detect_opportunity,
    defensive_reset,
    draw_risk_threshold,
    execute_predatory,
    exposure_ratios,
    peg_to_implied,
)
from .calibration import (
    CalibrationParams,
    default_parameters,
    sample_initial_dealing_price,
    stationary_profile_cdf,
    stationary_profile_density,
    steps_to_seconds,
    theoretical_mean_wait,
    with_makers,
)
from .engine import (
    ArbitrageLoopError,
    RunArtifacts,
    Simulation,
    SimulationConfig,
    run,
    run_ensemble,
)
from .lob import (
    BestQuotes,
    MarketId,
    MarketMakerState,
    MarketState,
    Transaction,
    TransactionKind,
    UnresolvedCrossingError,
    Variant,
    apply_dealing_update,
    best_quotes,
    match_and_settle,
    quotes,
)
from .trend import (
    ALL_CONFIGS,
    EcologyConfig,
    TrendConfig,
    TrendScheme,
    trend_exponential,
    trend_linear,
    trend_sign,
)

__version__ = "0.1.0"

__all__ = [
    "ARBITRAGER_ID",
    "ALL_CONFIGS",
    "ArbitrageLoopError",
    "BestQuotes",
    "CalibrationParams",
    "EcologyConfig",
    "MarketId",
    "MarketMakerState",
    "MarketState",
    "OpportunityKind",
    "OpportunityRecord",
    "RiskProfile",
    "RunArtifacts",
    "Simulation",
    "SimulationConfig",
    "Transaction",
    "TransactionKind",
    "TrendConfig",
    "TrendScheme",
    "UnresolvedCrossingError",
    "Variant",
    "apply_dealing_update",
    "arb_ratio_type1",
    "arb_ratio_type2",
    "best_quotes",
    "default_parameters",
    "defensive_reset",
    "detect_opportunity",
    "draw_risk_threshold",
    "execute_predatory",
    "exposure_ratios",
    "match_and_settle",
    "peg_to_implied",
    "quotes",
    "run",
    "run_ensemble",
    "sample_initial_dealing_price",
    "stationary_profile_cdf",
    "stationary_profile_density",
    "steps_to_seconds",
    "theoretical_mean_wait",
    "trend_exponential",
    "trend_linear",
    "trend_sign",
    "with_makers",
]
