//! The composed online merchant: spend a learning phase running the ratio
//! learner (realizing whatever profit those query rounds happen to earn),
//! then price near-optimally against the learned ratios for the remaining
//! rounds. Goods the learner marked unlearnable are purchased under any
//! prices, so they are priced at 1 and their cost leaves the effective
//! budget.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::consumer::{best_bundle, SimulatedConsumer, TieBreakPolicy};
use crate::learnval::{learn_valuations, LearnValError, LearnedRatios, LearnedValue, SearchStrategy};
use crate::model::{Bundle, MarketInstance, PriceVector};
use crate::optprice::{candidate_prices_for, best_candidate, optimal_prices_for, OptPriceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Learning,
    Exploit,
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub t: usize,
    pub prices: PriceVector,
    pub bundle: Bundle,
    pub profit: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone)]
pub struct RegretLedger {
    pub rounds: Vec<RoundRecord>,
    /// Benchmark per-round profit: the grid-oracle OPT when supplied, else
    /// the certified best-candidate profit over the learnable goods.
    pub opt_reference: f64,
    pub learning_rounds: usize,
    /// Per-round profit of the fixed exploit prices; meaningless when the
    /// ledger is incomplete.
    pub exploit_profit: f64,
    pub exploit_prices: PriceVector,
    /// False when the round budget ran out inside the learning phase.
    pub complete: bool,
    pub eps: f64,
    pub learned: LearnedRatios,
}

impl RegretLedger {
    pub fn cumulative_profit(&self) -> f64 {
        self.rounds.iter().map(|r| r.profit).sum()
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.rounds.len() as f64 * self.opt_reference - self.cumulative_profit()
    }

    pub fn per_round_regret(&self) -> f64 {
        self.per_round_regret_at(self.rounds.len())
    }

    /// Per-round regret over the first `t_prime` rounds.
    pub fn per_round_regret_at(&self, t_prime: usize) -> f64 {
        assert!(t_prime <= self.rounds.len() && t_prime > 0);
        let profit: f64 = self.rounds[..t_prime].iter().map(|r| r.profit).sum();
        self.opt_reference - profit / t_prime as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfitMaxError {
    Learn(LearnValError),
    Price(OptPriceError),
}

impl fmt::Display for ProfitMaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfitMaxError::Learn(e) => write!(f, "learning phase failed: {}", e),
            ProfitMaxError::Price(e) => write!(f, "pricing phase failed: {}", e),
        }
    }
}

impl From<LearnValError> for ProfitMaxError {
    fn from(e: LearnValError) -> Self {
        ProfitMaxError::Learn(e)
    }
}

impl From<OptPriceError> for ProfitMaxError {
    fn from(e: OptPriceError) -> Self {
        ProfitMaxError::Price(e)
    }
}

/// Default accuracy target `(n^2 / T) * ln((1 - delta) / delta^2)`, which
/// balances learning cost against exploit slack over a T-round horizon.
pub fn default_eps(n: usize, delta: f64, t_rounds: usize) -> f64 {
    let n = n as f64;
    (n * n / t_rounds.max(1) as f64) * ((1.0 - delta) / (delta * delta)).ln()
}

/// Exploit prices from learned ratios: learnable goods priced by the
/// perturbed candidate family over their subvector, unlearnable goods
/// pinned at 1 with their unit drained from the effective budget.
pub fn exploit_prices(
    inst: &MarketInstance,
    learned: &LearnedRatios,
    eps: f64,
) -> Result<(PriceVector, f64), ProfitMaxError> {
    let learnable: Vec<usize> = (0..inst.n)
        .filter(|&i| matches!(learned.s[i], LearnedValue::Ratio(_)))
        .collect();
    let mut prices = alloc::vec![1.0; inst.n];
    if learnable.is_empty() {
        let p = PriceVector::new(prices).unwrap();
        let (x, profit) = crate::consumer::merchant_best_bundle(inst, &p);
        let _ = x;
        return Ok((p, profit));
    }
    let w: Vec<f64> = learnable
        .iter()
        .map(|&i| learned.s[i].ratio().unwrap().value())
        .collect();
    let costs: Vec<f64> = learnable.iter().map(|&i| inst.c[i]).collect();
    let unl = inst.n - learnable.len();
    let budget = (inst.budget - unl as f64).max(0.0);
    let sub = optimal_prices_for(&w, &costs, budget, inst.delta, eps)?;
    for (slot, &i) in learnable.iter().enumerate() {
        prices[i] = sub.prices[slot];
    }
    let certified = best_candidate(&candidate_prices_for(&w, &costs, budget)).profit;
    Ok((PriceVector::new(prices).unwrap(), certified))
}

/// Runs the full merchant for `t_rounds` rounds against a simulated
/// consumer. The consumer answers learning queries with the CheapestFirst
/// policy (exact detection at ratio equality) and exploit rounds with
/// `exploit_policy`; exploit profit is policy-independent because the
/// perturbed prices specify the bundle uniquely on the learnable goods.
pub fn run_profit_max(
    inst: &MarketInstance,
    t_rounds: usize,
    eps: Option<f64>,
    opt_reference: Option<f64>,
    exploit_policy: TieBreakPolicy,
) -> Result<RegretLedger, ProfitMaxError> {
    let eps = eps.unwrap_or_else(|| default_eps(inst.n, inst.delta, t_rounds));
    let mut oracle = SimulatedConsumer::new(inst.clone(), TieBreakPolicy::CheapestFirst);
    let learned = learn_valuations(&mut oracle, SearchStrategy::Binary)?;
    let learning_rounds = learned.log.count();

    let mut rounds = Vec::new();
    for (t, (p, x)) in learned.log.queries.iter().enumerate() {
        if t >= t_rounds {
            break;
        }
        rounds.push(RoundRecord {
            t,
            prices: p.clone(),
            bundle: x.clone(),
            profit: x.profit(p, &inst.c),
            phase: Phase::Learning,
        });
    }

    let (p_hat, certified) = exploit_prices(inst, &learned, eps)?;
    let x_hat = best_bundle(inst, &p_hat, exploit_policy);
    let exploit_profit = x_hat.profit(&p_hat, &inst.c);
    let complete = t_rounds >= learning_rounds;
    if complete {
        for t in learning_rounds..t_rounds {
            rounds.push(RoundRecord {
                t,
                prices: p_hat.clone(),
                bundle: x_hat.clone(),
                profit: exploit_profit,
                phase: Phase::Exploit,
            });
        }
    }

    Ok(RegretLedger {
        rounds,
        opt_reference: opt_reference.unwrap_or(certified),
        learning_rounds,
        exploit_profit,
        exploit_prices: p_hat,
        complete,
        eps,
        learned,
    })
}

/// Per-round regret at each checkpoint prefix of the ledger.
pub fn regret_curve(ledger: &RegretLedger, checkpoints: &[usize]) -> Vec<(usize, f64)> {
    checkpoints
        .iter()
        .map(|&t| (t, ledger.per_round_regret_at(t)))
        .collect()
}
