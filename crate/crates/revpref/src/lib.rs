//! Online learning and profit maximization from revealed preferences.
//!
//! A budget-constrained consumer with linear utility responds to posted
//! prices by greedy fractional-knapsack purchase. This crate simulates that
//! consumer, computes (near-)optimal prices when valuations are known,
//! learns valuation ratios from price queries when they are not, turns the
//! learner into a low-regret pricing strategy, and tracks a consistency
//! polytope for the setting where prices arrive exogenously.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live
//! in the companion `revpref-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod consumer;
pub mod exog;
pub mod learnval;
pub mod model;
pub mod optprice;
pub mod polytope;
pub mod profitmax;

pub use consumer::{
    best_bundle, best_bundle_for, is_uniquely_specified, merchant_best_bundle, ConsumerOracle,
    SimulatedConsumer, TieBreakPolicy,
};
pub use exog::{
    run_exog, ExogConfig, ExogError, ExogRound, ExogRunLog, FixedPrices, LearnerState,
    ObserveOutcome, PriceSource, RandomGridPrices,
};
pub use learnval::{
    learn_valuations, LearnValError, LearnedRatios, LearnedValue, QueryBudgetLog, Ratio,
    SearchStrategy,
};
pub use model::{
    validate_instance, Bundle, MarketInstance, ModelError, PriceVector, RATIO_TIE_TOL, SPEND_TOL,
};
pub use polytope::{
    default_mixing_steps, HalfspaceSystem, PolytopeError, Sense, WidthReport,
};
pub use profitmax::{
    default_eps, regret_curve, run_profit_max, Phase, ProfitMaxError, RegretLedger, RoundRecord,
};
pub use optprice::{
    brute_force_opt, candidate_prices, optimal_prices, optimal_prices_for, CandidatePricing,
    OptPriceError, PerturbedPricing,
};
