//! Offline computation of (near-)optimal prices from known valuations: the
//! pivot candidate family, merchant-best tie resolution, and the uniqueness
//! perturbation. Valuations enter only through their ratios, so every entry
//! point also accepts an arbitrarily rescaled positive valuation vector.

use alloc::vec::Vec;
use core::fmt;

use crate::consumer::{best_bundle_for, is_uniquely_specified_for, TieBreakPolicy};
use crate::model::{Bundle, MarketInstance, PriceVector, SPEND_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum OptPriceError {
    /// Perturbation drove a price to zero or below; impossible for eps < n.
    PerturbationUnderflow { index: usize, price: f64 },
    /// The perturbed prices failed the uniqueness check.
    NotUnique,
    /// Realized profit fell short of the certified bound.
    ProfitShortfall { realized: f64, bound: f64 },
    /// The exhaustive price-grid oracle is guarded to n <= 3.
    TooManyGoods { n: usize },
}

impl fmt::Display for OptPriceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptPriceError::PerturbationUnderflow { index, price } => {
                write!(f, "perturbed price p_{} = {} is non-positive", index + 1, price)
            }
            OptPriceError::NotUnique => write!(f, "perturbed prices do not uniquely specify a bundle"),
            OptPriceError::ProfitShortfall { realized, bound } => {
                write!(f, "realized profit {} below certified bound {}", realized, bound)
            }
            OptPriceError::TooManyGoods { n } => {
                write!(f, "price-grid oracle rejects n = {} > 3", n)
            }
        }
    }
}

/// One pivot candidate: prices `p_i = min(v_i / v_k, 1)`, the merchant-best
/// bundle among the consumer's indifference set, and its profit.
#[derive(Debug, Clone)]
pub struct CandidatePricing {
    pub pivot: usize,
    pub prices: PriceVector,
    pub bundle: Bundle,
    pub profit: f64,
}

/// Near-optimal prices under which the consumer's response is unique.
#[derive(Debug, Clone)]
pub struct PerturbedPricing {
    pub prices: PriceVector,
    pub bundle: Bundle,
    /// Certified lower bound: profit at these prices is at least OPT - eps.
    pub profit_bound: f64,
}

/// All n pivot candidates for an arbitrary positive valuation vector.
pub fn candidate_prices_for(v: &[f64], costs: &[f64], budget: f64) -> Vec<CandidatePricing> {
    let n = v.len();
    (0..n)
        .map(|k| {
            let p: Vec<f64> = v.iter().map(|&vi| (vi / v[k]).min(1.0)).collect();
            let prices = PriceVector::new(p).expect("candidate prices are in (0,1]");
            let bundle = best_bundle_for(v, &prices, budget, TieBreakPolicy::MerchantBest, costs);
            let profit = bundle.profit(&prices, costs);
            CandidatePricing { pivot: k, prices, bundle, profit }
        })
        .collect()
}

pub fn candidate_prices(inst: &MarketInstance) -> Vec<CandidatePricing> {
    candidate_prices_for(&inst.v, &inst.c, inst.budget)
}

/// Best candidate by profit; ties resolved to the smallest pivot for
/// deterministic output.
pub fn best_candidate(candidates: &[CandidatePricing]) -> &CandidatePricing {
    candidates
        .iter()
        .fold(None::<&CandidatePricing>, |best, c| match best {
            Some(b) if c.profit <= b.profit => Some(b),
            _ => Some(c),
        })
        .expect("at least one candidate")
}

/// Perturbs the best candidate so the consumer's response is unique while
/// losing at most `eps` profit. `delta` is the valuation discretization of
/// the underlying consumer; the perturbation steps are `eta = delta*eps/n`
/// for fully purchased goods and `delta*eta` for the fractional good.
pub fn optimal_prices_for(
    v: &[f64],
    costs: &[f64],
    budget: f64,
    delta: f64,
    eps: f64,
) -> Result<PerturbedPricing, OptPriceError> {
    let n = v.len();
    let candidates = candidate_prices_for(v, costs, budget);
    let best = best_candidate(&candidates);
    let eta = delta * eps / n as f64;

    let mut p_hat = Vec::with_capacity(n);
    for i in 0..n {
        let xi = best.bundle.0[i];
        let pi = if xi <= SPEND_TOL {
            1.0
        } else if xi >= 1.0 - SPEND_TOL {
            best.prices[i] - eta
        } else {
            best.prices[i] - delta * eta
        };
        if pi <= 0.0 {
            return Err(OptPriceError::PerturbationUnderflow { index: i, price: pi });
        }
        p_hat.push(pi);
    }
    let p_hat = PriceVector::new(p_hat).expect("perturbed prices stay in (0,1]");

    if !is_uniquely_specified_for(v, &p_hat, budget) {
        return Err(OptPriceError::NotUnique);
    }
    let x_hat = best_bundle_for(v, &p_hat, budget, TieBreakPolicy::Lexicographic, costs);
    let realized = x_hat.profit(&p_hat, costs);
    let bound = best.profit - eps;
    if realized < bound - SPEND_TOL {
        return Err(OptPriceError::ProfitShortfall { realized, bound });
    }
    Ok(PerturbedPricing { prices: p_hat, bundle: x_hat, profit_bound: bound })
}

pub fn optimal_prices(inst: &MarketInstance, eps: f64) -> Result<PerturbedPricing, OptPriceError> {
    optimal_prices_for(&inst.v, &inst.c, inst.budget, inst.delta, eps)
}

/// Exhaustive search over the price grid `{delta, delta+res, ..., 1}^n`,
/// evaluating the merchant-best bundle at every vertex. Independent oracle
/// for OPT in tests; guarded to n <= 3.
pub fn brute_force_opt(
    inst: &MarketInstance,
    resolution: f64,
) -> Result<(PriceVector, f64), OptPriceError> {
    if inst.n > 3 {
        return Err(OptPriceError::TooManyGoods { n: inst.n });
    }
    let mut axis = Vec::new();
    let mut p = inst.delta;
    while p < 1.0 - SPEND_TOL {
        axis.push(p);
        p += resolution;
    }
    axis.push(1.0);

    let mut best_profit = f64::NEG_INFINITY;
    let mut best_prices = alloc::vec![1.0; inst.n];
    let mut counter = alloc::vec![0usize; inst.n];
    loop {
        let prices =
            PriceVector::new(counter.iter().map(|&j| axis[j]).collect()).expect("grid in range");
        let (_, profit) = crate::consumer::merchant_best_bundle(inst, &prices);
        if profit > best_profit {
            best_profit = profit;
            best_prices = prices.as_slice().to_vec();
        }
        // odometer over the grid
        let mut d = 0;
        loop {
            if d == inst.n {
                return Ok((PriceVector::new(best_prices).unwrap(), best_profit));
            }
            counter[d] += 1;
            if counter[d] < axis.len() {
                break;
            }
            counter[d] = 0;
            d += 1;
        }
    }
}
