//! Active learning of valuation ratios via price queries: find the
//! least-preferred purchased good, binary-search the ratios of goods outside
//! the purchase set, then sweep a shared price multiplier to squeeze out the
//! originally-purchased goods one by one. Goods that survive every sweep are
//! purchased under any prices and reported as unlearnable.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::consumer::ConsumerOracle;
use crate::model::{Bundle, PriceVector, SPEND_TOL};

/// Ordered transcript of (prices, response) pairs; its length is the query
/// count bounded by the theory.
#[derive(Debug, Clone, Default)]
pub struct QueryBudgetLog {
    pub queries: Vec<(PriceVector, Bundle)>,
}

impl QueryBudgetLog {
    pub fn count(&self) -> usize {
        self.queries.len()
    }
}

/// Exact reduced fraction of delta-grid multiples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        debug_assert!(num > 0 && den > 0);
        let g = gcd(num, den);
        Ratio { num: num / g, den: den / g }
    }

    pub fn one() -> Self {
        Ratio { num: 1, den: 1 }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// self / other, reduced.
    pub fn div(&self, other: &Ratio) -> Ratio {
        Ratio::new(self.num * other.den, self.den * other.num)
    }

    pub fn invert(&self) -> Ratio {
        Ratio { num: self.den, den: self.num }
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnedValue {
    /// `v_i / v_n` as an exact grid fraction.
    Ratio(Ratio),
    /// Purchased under every price vector; its value is irrelevant for
    /// optimal pricing.
    Unlearnable,
}

impl LearnedValue {
    pub fn ratio(&self) -> Option<Ratio> {
        match self {
            LearnedValue::Ratio(r) => Some(*r),
            LearnedValue::Unlearnable => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LearnedRatios {
    pub s: Vec<LearnedValue>,
    /// Least-preferred good purchased at all-ones prices; None when every
    /// good was fully purchased there.
    pub pivot: Option<usize>,
    pub log: QueryBudgetLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    Binary,
    /// Step-by-step sweep at the same resolution; kept for cross-validation
    /// against the binary search.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnValError {
    /// More than one grid ratio fits the detection bracket; cannot happen at
    /// the stated resolutions unless the oracle is inconsistent.
    AmbiguousSnap { lo: f64, hi: f64 },
    /// No grid ratio fits the detection bracket.
    EmptySnap { lo: f64, hi: f64 },
    /// A query response contradicted the greedy-consumer model.
    InconsistentOracle,
}

impl fmt::Display for LearnValError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnValError::AmbiguousSnap { lo, hi } => {
                write!(f, "bracket [{}, {}] contains multiple grid ratios", lo, hi)
            }
            LearnValError::EmptySnap { lo, hi } => {
                write!(f, "bracket [{}, {}] contains no grid ratio", lo, hi)
            }
            LearnValError::InconsistentOracle => write!(f, "oracle response is not a greedy best response"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PivotOutcome {
    /// Pivot index plus the all-ones response.
    Pivot { j: usize, base: Bundle },
    /// Every good fully purchased at all-ones prices; nothing displaceable.
    AllPurchased { base: Bundle },
}

fn ask(oracle: &mut dyn ConsumerOracle, log: &mut QueryBudgetLog, p: PriceVector) -> Bundle {
    let x = oracle.query(&p);
    log.queries.push((p, x.clone()));
    x
}

/// The unique grid ratio `a/b` (a, b multiples of delta) inside the closed
/// bracket. The bracket width sits below the minimum gap `delta^2` between
/// distinct grid ratios, so ambiguity means a bug, not a tie.
fn snap_to_grid_ratio(lo: f64, hi: f64, levels: u64) -> Result<Ratio, LearnValError> {
    let mut found: Option<Ratio> = None;
    for den in 1..=levels {
        for num in 1..=levels {
            let q = num as f64 / den as f64;
            if q > 1.0 + 1e-9 {
                break;
            }
            if q >= lo - 1e-9 && q <= hi + 1e-9 {
                let r = Ratio::new(num, den);
                match found {
                    None => found = Some(r),
                    Some(prev) if prev == r => {}
                    Some(_) => return Err(LearnValError::AmbiguousSnap { lo, hi }),
                }
            }
        }
    }
    found.ok_or(LearnValError::EmptySnap { lo, hi })
}

/// Phase 1: the all-ones query, plus one displacement probe when no good is
/// fractionally bought there.
pub fn find_pivot(
    oracle: &mut dyn ConsumerOracle,
    log: &mut QueryBudgetLog,
) -> Result<PivotOutcome, LearnValError> {
    let n = oracle.num_goods();
    let delta = oracle.delta();
    let base = ask(oracle, log, PriceVector::ones(n));

    if let Some(j) = base.fractional_index() {
        return Ok(PivotOutcome::Pivot { j, base });
    }
    if base.0.iter().all(|&x| x >= 1.0 - SPEND_TOL) {
        return Ok(PivotOutcome::AllPurchased { base });
    }

    // No fractional good: the budget boundary coincides with a good
    // boundary. Dropping one unpurchased good's price to delta displaces
    // exactly the marginal purchased good.
    let probe = base
        .0
        .iter()
        .position(|&x| x <= SPEND_TOL)
        .expect("some good is unpurchased here");
    let mut p = alloc::vec![1.0; n];
    p[probe] = delta;
    let shifted = ask(oracle, log, PriceVector::new(p).unwrap());

    let mut j = None;
    let mut largest_drop = SPEND_TOL;
    for i in 0..n {
        if i == probe {
            continue;
        }
        let drop = base.0[i] - shifted.0[i];
        if drop > largest_drop {
            largest_drop = drop;
            j = Some(i);
        }
    }
    match j {
        Some(j) => Ok(PivotOutcome::Pivot { j, base }),
        None => Err(LearnValError::InconsistentOracle),
    }
}

/// Phase 2: for every good unpurchased at all-ones prices, search the
/// largest price at which it enters the bundle (all other prices reset
/// to 1); that price is `v_k / v_j` snapped to the grid.
pub fn learn_lower_ratios(
    oracle: &mut dyn ConsumerOracle,
    log: &mut QueryBudgetLog,
    base: &Bundle,
    strategy: SearchStrategy,
) -> Result<Vec<Option<Ratio>>, LearnValError> {
    let n = oracle.num_goods();
    let delta = oracle.delta();
    let levels = (1.0 / delta).round() as u64;
    let step = delta * delta / 2.0;
    let top = ((1.0 - delta) / step).round() as usize; // grid: delta + i*step, i in 0..=top

    let grid = |i: usize| (delta + i as f64 * step).min(1.0);
    let mut out = alloc::vec![None; n];

    for k in 0..n {
        if base.0[k] > SPEND_TOL {
            continue;
        }
        let purchased_at = |i: usize, oracle: &mut dyn ConsumerOracle,
                                log: &mut QueryBudgetLog| {
            let mut p = alloc::vec![1.0; n];
            p[k] = grid(i);
            let x = ask(oracle, log, PriceVector::new(p).unwrap());
            x.0[k] > SPEND_TOL
        };

        // x_k = 0 at price 1 is known from the base query; x_k > 0 at price
        // delta since the ratio there reaches 1 >= r_j.
        let lo = match strategy {
            SearchStrategy::Binary => {
                if !purchased_at(0, oracle, log) {
                    return Err(LearnValError::InconsistentOracle);
                }
                let mut lo = 0usize;
                let mut hi = top;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if purchased_at(mid, oracle, log) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
            SearchStrategy::Linear => {
                let mut i = top;
                loop {
                    if i == 0 {
                        if !purchased_at(0, oracle, log) {
                            return Err(LearnValError::InconsistentOracle);
                        }
                        break 0;
                    }
                    i -= 1;
                    if purchased_at(i, oracle, log) {
                        break i;
                    }
                }
            }
        };
        out[k] = Some(snap_to_grid_ratio(grid(lo), grid(lo + 1), levels)?);
    }
    Ok(out)
}

/// Mutable phase-3 state: what is known so far and which fully-purchased
/// goods still need a ratio.
pub struct SweepState {
    /// Known ratios `s_i = v_i / v_n`, indexed by good.
    pub known: Vec<Option<Ratio>>,
    /// Goods fully purchased at all-ones prices whose ratio is unknown.
    pub unknown: Vec<usize>,
}

/// Phase 3: repeatedly equalize the bang per buck of all known goods via a
/// shared multiplier `alpha` and find the largest alpha at which some
/// unknown good is squeezed out of the bundle entirely.
///
/// The squeeze event is not monotone in alpha over [0, 1]: at small alpha
/// the known goods become cheap and the freed budget buys the unknown goods
/// back. It is monotone above `alpha_0 = (B - |U| + 1) / sum(s_i)`, the
/// point below which the known block cannot exhaust the budget, so the
/// search is seeded at the first grid multiple at or above alpha_0. When
/// the seed probe shows no squeeze, the remaining goods are purchased under
/// any price vector and the loop ends.
pub fn learn_upper_ratios(
    oracle: &mut dyn ConsumerOracle,
    log: &mut QueryBudgetLog,
    state: &mut SweepState,
    strategy: SearchStrategy,
) -> Result<(), LearnValError> {
    let n = oracle.num_goods();
    let delta = oracle.delta();
    let budget = oracle.budget();
    let levels = (1.0 / delta).round() as u64;
    let rho = delta * delta / (2.0 * (1.0 - delta));
    // 1/rho = 2m(m-1) is an integer, so 1 and delta sit on the alpha grid
    let top = (1.0 / rho).round() as usize;

    while !state.unknown.is_empty() {
        let sigma: f64 = state
            .known
            .iter()
            .flatten()
            .map(|r| r.value())
            .sum();
        let u_count = state.unknown.len() as f64;
        let alpha0 = (budget - u_count + 1.0) / sigma;
        let lo_idx = ((alpha0 / rho) - 1e-9).ceil().max(1.0) as usize;
        if lo_idx >= top {
            break; // no feasible squeeze: everything left is always bought
        }

        let query_at = |i: usize, state: &SweepState, oracle: &mut dyn ConsumerOracle,
                        log: &mut QueryBudgetLog| {
            let alpha = i as f64 * rho;
            let mut p = alloc::vec![1.0; n];
            for g in 0..n {
                if let Some(r) = state.known[g] {
                    // below the switch point these are all uncapped; above
                    // it a cap only raises already-dominated goods to 1
                    p[g] = (alpha * r.value()).min(1.0);
                }
            }
            ask(oracle, log, PriceVector::new(p).unwrap())
        };
        let squeezed = |x: &Bundle, state: &SweepState| -> Option<usize> {
            // highest-index zeroed unknown good: the last one in the
            // cheapest-first purchase order among value ties
            state
                .unknown
                .iter()
                .copied()
                .filter(|&g| x.0[g] <= SPEND_TOL)
                .max()
        };

        let first = query_at(lo_idx, state, oracle, log);
        if squeezed(&first, state).is_none() {
            break; // the rest are purchased under any prices
        }

        let (detect_idx, detect_bundle) = match strategy {
            SearchStrategy::Binary => {
                // e(alpha) is true on [alpha0, alpha*] and false above;
                // alpha = 1 is the all-ones query where everything unknown
                // is fully purchased.
                let mut lo = lo_idx;
                let mut lo_bundle = first;
                let mut hi = top;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    let x = query_at(mid, state, oracle, log);
                    if squeezed(&x, state).is_some() {
                        lo = mid;
                        lo_bundle = x;
                    } else {
                        hi = mid;
                    }
                }
                (lo, lo_bundle)
            }
            SearchStrategy::Linear => {
                let mut best = (lo_idx, first);
                for i in (lo_idx + 1)..top {
                    let x = query_at(i, state, oracle, log);
                    if squeezed(&x, state).is_some() {
                        best = (i, x);
                    } else {
                        break;
                    }
                }
                best
            }
        };

        let alpha_star =
            snap_to_grid_ratio(detect_idx as f64 * rho, (detect_idx + 1) as f64 * rho, levels)?;
        let k = squeezed(&detect_bundle, state).expect("detection bundle has a squeezed good");
        state.known[k] = Some(alpha_star.invert());
        state.unknown.retain(|&g| g != k);
    }
    Ok(())
}

/// Composes the three phases into the full ratio learner.
pub fn learn_valuations(
    oracle: &mut dyn ConsumerOracle,
    strategy: SearchStrategy,
) -> Result<LearnedRatios, LearnValError> {
    let n = oracle.num_goods();
    let mut log = QueryBudgetLog::default();

    let (j, base) = match find_pivot(oracle, &mut log)? {
        PivotOutcome::AllPurchased { .. } => {
            return Ok(LearnedRatios {
                s: alloc::vec![LearnedValue::Unlearnable; n],
                pivot: None,
                log,
            });
        }
        PivotOutcome::Pivot { j, base } => (j, base),
    };

    // ratios v_k / v_j for the pivot and every unpurchased good
    let mut t = learn_lower_ratios(oracle, &mut log, &base, strategy)?;
    t[j] = Some(Ratio::one());

    // renormalize to the least-valued learned good
    let t_min = t.iter().flatten().min().copied().expect("pivot ratio is present");
    let mut known: Vec<Option<Ratio>> =
        t.iter().map(|r| r.map(|r| r.div(&t_min))).collect();

    let unknown: Vec<usize> = (0..n)
        .filter(|&i| i != j && base.0[i] >= 1.0 - SPEND_TOL)
        .collect();
    let mut state = SweepState { known, unknown };
    learn_upper_ratios(oracle, &mut log, &mut state, strategy)?;
    known = state.known;

    let s = known
        .into_iter()
        .map(|r| match r {
            Some(r) => LearnedValue::Ratio(r),
            None => LearnedValue::Unlearnable,
        })
        .collect();
    Ok(LearnedRatios { s, pivot: Some(j), log })
}
