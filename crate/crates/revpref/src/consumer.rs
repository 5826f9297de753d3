//! The consumer's best response to posted prices: a greedy fractional
//! knapsack with pluggable tie-breaking, plus the merchant-preferred member
//! of the indifference set and the uniqueness test.

use alloc::vec::Vec;

use crate::model::{ratios_tie, Bundle, MarketInstance, PriceVector, SPEND_TOL};

/// How the consumer resolves ties in bang per buck. Every learning guarantee
/// holds for an arbitrary selection from the indifference set, so the
/// selection rule is explicit and injectable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakPolicy {
    /// Among equal ratios, buy the lower index first.
    Lexicographic,
    /// Among equal ratios, buy the lower price first, then lower index.
    CheapestFirst,
    /// Saturate the remaining budget at minimum merchant cost.
    MerchantBest,
}

/// Indices grouped into maximal runs of tied bang-per-buck ratios, runs in
/// descending ratio order.
fn indifference_runs(v: &[f64], p: &PriceVector) -> Vec<Vec<usize>> {
    let n = v.len();
    let r: Vec<f64> = (0..n).map(|i| v[i] / p[i]).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| r[b].partial_cmp(&r[a]).unwrap().then(a.cmp(&b)));

    let mut runs: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match runs.last_mut() {
            Some(run) if ratios_tie(r[run[0]], r[i]) => run.push(i),
            _ => runs.push(alloc::vec![i]),
        }
    }
    runs
}

fn order_within_run(run: &mut [usize], p: &PriceVector, costs: &[f64], policy: TieBreakPolicy) {
    match policy {
        TieBreakPolicy::Lexicographic => run.sort_unstable(),
        TieBreakPolicy::CheapestFirst => {
            run.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)))
        }
        TieBreakPolicy::MerchantBest => run.sort_by(|&a, &b| {
            let ka = costs[a] / p[a];
            let kb = costs[b] / p[b];
            ka.partial_cmp(&kb).unwrap().then(a.cmp(&b))
        }),
    }
}

/// Greedy fractional knapsack over an arbitrary valuation vector. `costs`
/// are consulted only by the `MerchantBest` policy.
pub fn best_bundle_for(
    v: &[f64],
    p: &PriceVector,
    budget: f64,
    policy: TieBreakPolicy,
    costs: &[f64],
) -> Bundle {
    let n = v.len();
    let mut x = Bundle::zeros(n);
    let mut remaining = budget.min(p.total());
    if remaining <= SPEND_TOL {
        return x;
    }
    for mut run in indifference_runs(v, p) {
        let run_price: f64 = run.iter().map(|&i| p[i]).sum();
        if run_price <= remaining + SPEND_TOL {
            for &i in &run {
                x.0[i] = 1.0;
            }
            remaining = (remaining - run_price).max(0.0);
        } else {
            // the run straddles the budget boundary; the policy decides
            // which members soak up the rest
            order_within_run(&mut run, p, costs, policy);
            for &i in &run {
                let take = (remaining / p[i]).min(1.0);
                x.0[i] = take;
                remaining -= take * p[i];
                if remaining <= SPEND_TOL {
                    break;
                }
            }
            remaining = 0.0;
        }
        if remaining <= SPEND_TOL {
            break;
        }
    }
    x
}

/// The consumer's utility-maximizing response `X(u, p, B)` under the given
/// tie-break policy.
pub fn best_bundle(inst: &MarketInstance, p: &PriceVector, policy: TieBreakPolicy) -> Bundle {
    best_bundle_for(&inst.v, p, inst.budget, policy, &inst.c)
}

/// The member of the consumer's indifference set that maximizes merchant
/// profit, together with that profit. Two sorts: ratios, then cost-per-unit
/// of price inside the straddling run.
pub fn merchant_best_bundle(inst: &MarketInstance, p: &PriceVector) -> (Bundle, f64) {
    let x = best_bundle_for(&inst.v, p, inst.budget, TieBreakPolicy::MerchantBest, &inst.c);
    let profit = x.profit(p, &inst.c);
    (x, profit)
}

/// True iff `X(u, p, B)` is a singleton: greedy purchase never meets an
/// indifference run straddling the budget boundary.
pub fn is_uniquely_specified(inst: &MarketInstance, p: &PriceVector) -> bool {
    is_uniquely_specified_for(&inst.v, p, inst.budget)
}

/// Uniqueness test over an arbitrary valuation vector (valuations enter
/// only through the ratio ordering, so any positive rescaling works).
pub fn is_uniquely_specified_for(v: &[f64], p: &PriceVector, budget: f64) -> bool {
    let mut remaining = budget.min(p.total());
    for run in indifference_runs(v, p) {
        if remaining <= SPEND_TOL {
            return true;
        }
        let run_price: f64 = run.iter().map(|&i| p[i]).sum();
        if run_price > remaining + SPEND_TOL {
            return run.len() == 1;
        }
        remaining -= run_price;
    }
    true
}

/// Price-query access to a consumer; implemented by the in-process
/// simulator and mockable in tests. The budget and discretization are
/// public knowledge in this model.
pub trait ConsumerOracle {
    fn query(&mut self, p: &PriceVector) -> Bundle;
    fn num_goods(&self) -> usize;
    fn budget(&self) -> f64;
    fn delta(&self) -> f64;
}

/// A consumer simulated from a ground-truth instance.
#[derive(Debug, Clone)]
pub struct SimulatedConsumer {
    pub inst: MarketInstance,
    pub policy: TieBreakPolicy,
    pub queries: usize,
}

impl SimulatedConsumer {
    pub fn new(inst: MarketInstance, policy: TieBreakPolicy) -> Self {
        SimulatedConsumer { inst, policy, queries: 0 }
    }
}

impl ConsumerOracle for SimulatedConsumer {
    fn query(&mut self, p: &PriceVector) -> Bundle {
        self.queries += 1;
        best_bundle(&self.inst, p, self.policy)
    }

    fn num_goods(&self) -> usize {
        self.inst.n
    }

    fn budget(&self) -> f64 {
        self.inst.budget
    }

    fn delta(&self) -> f64 {
        self.inst.delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn inst(v: Vec<f64>, c: Vec<f64>, b: f64, delta: f64) -> MarketInstance {
        MarketInstance::new(v, c, b, delta).unwrap()
    }

    fn prices(p: Vec<f64>) -> PriceVector {
        PriceVector::new(p).unwrap()
    }

    #[test]
    fn greedy_buys_in_ratio_order() {
        let i = inst(vec![0.9, 0.6, 0.3], vec![0.0, 0.0, 0.0], 1.5, 0.1);
        let x = best_bundle(&i, &prices(vec![1.0, 1.0, 1.0]), TieBreakPolicy::Lexicographic);
        assert!(x.approx_eq(&Bundle(vec![1.0, 0.5, 0.0]), 1e-9));
    }

    #[test]
    fn budget_covering_everything_buys_everything() {
        let i = inst(vec![0.5, 0.5, 1.0], vec![0.0, 0.0, 0.0], 10.0, 0.5);
        let x = best_bundle(&i, &prices(vec![1.0, 0.7, 0.3]), TieBreakPolicy::Lexicographic);
        assert!(x.approx_eq(&Bundle(vec![1.0, 1.0, 1.0]), 1e-9));
    }

    #[test]
    fn higher_ratio_good_bought_first() {
        let i = inst(vec![0.5, 0.5], vec![0.0, 0.0], 1.0, 0.5);
        let x = best_bundle(&i, &prices(vec![1.0, 0.5]), TieBreakPolicy::Lexicographic);
        assert!(x.approx_eq(&Bundle(vec![0.5, 1.0]), 1e-9));
    }

    #[test]
    fn symmetric_tie_broken_by_policy() {
        let i = inst(vec![0.4, 0.4], vec![0.0, 0.0], 1.0, 0.2);
        let x = best_bundle(&i, &prices(vec![1.0, 1.0]), TieBreakPolicy::Lexicographic);
        assert!(x.approx_eq(&Bundle(vec![1.0, 0.0]), 1e-9));
    }

    #[test]
    fn cheapest_first_prefers_lower_price_at_tie() {
        // ratios tie at 1; CheapestFirst buys the cheaper good 2 first
        let i = inst(vec![1.0, 0.5], vec![0.0, 0.0], 1.0, 0.5);
        let x = best_bundle(&i, &prices(vec![1.0, 0.5]), TieBreakPolicy::CheapestFirst);
        assert!(x.approx_eq(&Bundle(vec![0.5, 1.0]), 1e-9));
    }

    #[test]
    fn merchant_best_steers_indifferent_consumer() {
        let i = inst(vec![0.5, 0.5], vec![0.3, 0.1], 1.0, 0.5);
        let (x, profit) = merchant_best_bundle(&i, &prices(vec![1.0, 1.0]));
        assert!(x.approx_eq(&Bundle(vec![0.0, 1.0]), 1e-9));
        assert!((profit - 0.9).abs() < 1e-9);
    }

    #[test]
    fn merchant_best_fills_larger_budget() {
        let i = inst(vec![0.5, 0.5], vec![0.3, 0.1], 1.5, 0.5);
        let (x, profit) = merchant_best_bundle(&i, &prices(vec![1.0, 1.0]));
        assert!(x.approx_eq(&Bundle(vec![0.5, 1.0]), 1e-9));
        assert!((profit - 1.25).abs() < 1e-9);
    }

    #[test]
    fn merchant_best_matches_unique_bundle() {
        let i = inst(vec![1.0, 0.5], vec![0.1, 0.2], 1.0, 0.5);
        let (x, profit) = merchant_best_bundle(&i, &prices(vec![1.0, 1.0]));
        assert!(x.approx_eq(&Bundle(vec![1.0, 0.0]), 1e-9));
        assert!((profit - 0.9).abs() < 1e-9);
    }

    #[test]
    fn uniqueness_cases() {
        let i = inst(vec![1.0, 0.5], vec![0.0, 0.0], 1.0, 0.5);
        assert!(is_uniquely_specified(&i, &prices(vec![1.0, 1.0])));

        let i = inst(vec![0.5, 0.5], vec![0.0, 0.0], 1.0, 0.5);
        assert!(!is_uniquely_specified(&i, &prices(vec![1.0, 1.0])));

        let i = inst(vec![0.9, 0.6, 0.3], vec![0.0, 0.0, 0.0], 1.5, 0.1);
        assert!(is_uniquely_specified(&i, &prices(vec![1.0, 1.0, 1.0])));
    }

    #[test]
    fn budget_saturation_and_single_fraction() {
        let i = inst(vec![0.8, 0.6, 0.2], vec![0.0, 0.0, 0.0], 1.3, 0.2);
        let p = prices(vec![0.9, 0.4, 0.7]);
        let x = best_bundle(&i, &p, TieBreakPolicy::Lexicographic);
        assert!((x.spend(&p) - i.budget.min(p.total())).abs() < 1e-9);
        let frac = x.0.iter().filter(|&&t| t > 1e-9 && t < 1.0 - 1e-9).count();
        assert!(frac <= 1);
    }
}
