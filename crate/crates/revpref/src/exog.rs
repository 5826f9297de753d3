//! Online bundle prediction under exogenous prices: keep the polytope of
//! valuation hypotheses consistent with every observed purchase ordering,
//! predict with a uniformly sampled hypothesis, and fix coordinates to the
//! delta grid when their width collapses.
//!
//! Ratio constraints are scale-invariant, so per ordered pair (i, j) only
//! the largest observed price ratio p_i/p_j matters; the learner stores
//! that single dominating constraint per pair, which keeps the LP row count
//! at most n(n-1) regardless of the horizon.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::consumer::{best_bundle, best_bundle_for, TieBreakPolicy};
use crate::model::{Bundle, MarketInstance, PriceVector};
use crate::polytope::{default_mixing_steps, HalfspaceSystem, PolytopeError};

/// Per-coordinate tolerance for the mistake comparison and for strictness
/// of observed quantity inequalities.
const EXOG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ExogError {
    Polytope(PolytopeError),
    /// Two fixed coordinates contradict an observed ordering; impossible
    /// against a rational consumer.
    InconsistentObservations { i: usize, j: usize },
}

impl fmt::Display for ExogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExogError::Polytope(e) => write!(f, "polytope failure: {}", e),
            ExogError::InconsistentObservations { i, j } => {
                write!(f, "fixed coordinates {} and {} contradict an observation", i, j)
            }
        }
    }
}

impl From<PolytopeError> for ExogError {
    fn from(e: PolytopeError) -> Self {
        ExogError::Polytope(e)
    }
}

#[derive(Debug, Clone)]
pub struct ExogConfig {
    pub delta: f64,
    /// Hit-and-run steps per sample; defaults to 1000 + 100 d^2.
    pub mixing_steps: Option<usize>,
    /// Prior-knowledge variant: add z_i >= delta to the box. The pseudocode
    /// keeps the lower bound at 0; off by default.
    pub value_floor: bool,
}

impl ExogConfig {
    pub fn new(delta: f64) -> Self {
        ExogConfig { delta, mixing_steps: None, value_floor: false }
    }
}

/// What one observation did to the state.
#[derive(Debug, Clone)]
pub struct ObserveOutcome {
    pub mistake: bool,
    /// Rows a . z >= b in full n-dimensional coordinates that this round
    /// inserted (dominated and duplicate rows are dropped). Homogeneous
    /// rows (b = 0) are the scale-invariant ratio constraints.
    pub constraints_added: Vec<(Vec<f64>, f64)>,
    /// Coordinates fixed by the width check this round.
    pub fixed_now: Vec<usize>,
}

/// The online learner: fixed coordinates, dominating pair-ratio constraints
/// over the active ones, and epoch/mistake counters.
#[derive(Debug, Clone)]
pub struct LearnerState {
    n: usize,
    cfg: ExogConfig,
    fixed: Vec<Option<f64>>,
    /// `ratio[i][j]` = largest observed p_i/p_j over rounds with x_i > x_j,
    /// both coordinates unfixed: encodes z_i * p_j - z_j * p_i >= 0.
    ratio: Vec<Vec<Option<f64>>>,
    /// Bounds induced by pairs with one fixed coordinate.
    lower: Vec<f64>,
    upper: Vec<f64>,
    pub epoch: usize,
    pub mistakes: usize,
    pub round: usize,
    last_sample: Option<Vec<f64>>,
    last_hypothesis: Option<Vec<f64>>,
    last_prediction: Option<Bundle>,
}

impl LearnerState {
    pub fn new(n: usize, cfg: ExogConfig) -> Self {
        LearnerState {
            n,
            cfg,
            fixed: alloc::vec![None; n],
            ratio: alloc::vec![alloc::vec![None; n]; n],
            lower: alloc::vec![0.0; n],
            upper: alloc::vec![1.0; n],
            epoch: 0,
            mistakes: 0,
            round: 0,
            last_sample: None,
            last_hypothesis: None,
            last_prediction: None,
        }
    }

    pub fn fixed(&self) -> &[Option<f64>] {
        &self.fixed
    }

    /// Unfixed coordinate indices, ascending; their order defines the
    /// polytope's dimension layout.
    pub fn active(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.fixed[i].is_none()).collect()
    }

    /// The consistent polytope over the active coordinates.
    pub fn system(&self) -> HalfspaceSystem {
        let active = self.active();
        let d = active.len();
        let mut sys = HalfspaceSystem::new(d);
        let slot = |g: usize| active.iter().position(|&a| a == g).unwrap();
        for &i in &active {
            for &j in &active {
                if let Some(r) = self.ratio[i][j] {
                    let mut a = alloc::vec![0.0; d];
                    a[slot(i)] = 1.0;
                    a[slot(j)] = -r;
                    sys.add_constraint(a, 0.0);
                }
            }
        }
        for &i in &active {
            let floor = if self.cfg.value_floor { self.cfg.delta } else { 0.0 };
            let lo = self.lower[i].max(floor);
            if lo > 0.0 {
                let mut a = alloc::vec![0.0; d];
                a[slot(i)] = 1.0;
                sys.add_constraint(a, lo);
            }
            if self.upper[i] < 1.0 {
                let mut a = alloc::vec![0.0; d];
                a[slot(i)] = -1.0;
                sys.add_constraint(a, -self.upper[i]);
            }
        }
        sys
    }

    fn mixing_steps(&self, d: usize) -> usize {
        self.cfg.mixing_steps.unwrap_or_else(|| default_mixing_steps(d))
    }

    /// Samples a hypothesis and predicts the consumer's bundle at `p`.
    /// A degenerate interior triggers the width check (fixing the collapsed
    /// coordinates) and a retry.
    pub fn predict<R: Rng + ?Sized>(
        &mut self,
        p: &PriceVector,
        budget: f64,
        rng: &mut R,
    ) -> Result<Bundle, ExogError> {
        let z = loop {
            let sys = self.system();
            let d = sys.dims();
            if d == 0 {
                break Vec::new();
            }
            match sys.sample_uniform(rng, self.mixing_steps(d), self.last_sample.as_deref()) {
                Ok(z) => break z,
                Err(PolytopeError::DegenerateInterior { .. }) => {
                    let fixed_now = self.width_check(rng)?;
                    assert!(!fixed_now.is_empty(), "degenerate interior but nothing to fix");
                }
                Err(e) => return Err(e.into()),
            }
        };
        let active = self.active();
        let mut v = alloc::vec![0.0; self.n];
        for i in 0..self.n {
            v[i] = self.fixed[i].unwrap_or(0.0);
        }
        for (slot, &g) in active.iter().enumerate() {
            v[g] = z[slot];
        }
        let costs = alloc::vec![0.0; self.n];
        let x = best_bundle_for(&v, p, budget, TieBreakPolicy::Lexicographic, &costs);
        self.last_sample = Some(z);
        self.last_hypothesis = Some(v);
        self.last_prediction = Some(x.clone());
        Ok(x)
    }

    /// Hypothesis sampled by the latest predict, in full coordinates.
    pub fn last_hypothesis(&self) -> Option<&[f64]> {
        self.last_hypothesis.as_deref()
    }

    /// Ingests the true bundle for the prices given to the latest predict:
    /// records the mistake, adds the revealed ratio constraints, and runs
    /// the width check.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        p: &PriceVector,
        x: &Bundle,
        rng: &mut R,
    ) -> Result<ObserveOutcome, ExogError> {
        let predicted = self.last_prediction.take().expect("observe follows predict");
        let mistake = !predicted.approx_eq(x, EXOG_TOL);
        if mistake {
            self.mistakes += 1;
        }
        self.round += 1;

        let mut added = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j || x.0[i] <= x.0[j] + EXOG_TOL {
                    continue;
                }
                match (self.fixed[i], self.fixed[j]) {
                    (None, None) => {
                        let r = p[i] / p[j];
                        if self.ratio[i][j].map_or(true, |old| r > old) {
                            self.ratio[i][j] = Some(r);
                            let mut a = alloc::vec![0.0; self.n];
                            a[i] = p[j];
                            a[j] = -p[i];
                            added.push((a, 0.0));
                        }
                    }
                    (None, Some(wj)) => {
                        let lb = (wj / p[j]) * p[i];
                        if lb > self.lower[i] {
                            self.lower[i] = lb;
                            let mut a = alloc::vec![0.0; self.n];
                            a[i] = 1.0;
                            added.push((a, lb));
                        }
                    }
                    (Some(wi), None) => {
                        let ub = (wi / p[i]) * p[j];
                        if ub < self.upper[j] {
                            self.upper[j] = ub;
                            let mut a = alloc::vec![0.0; self.n];
                            a[j] = -1.0;
                            added.push((a, -ub));
                        }
                    }
                    (Some(wi), Some(wj)) => {
                        if wi / p[i] < wj / p[j] - EXOG_TOL {
                            return Err(ExogError::InconsistentObservations { i, j });
                        }
                    }
                }
            }
        }
        if !added.is_empty() {
            if let Some(z) = &self.last_sample {
                if !self.system().contains(z, EXOG_TOL) {
                    // the stored walk position was cut off; restart next time
                    self.last_sample = None;
                }
            }
        }

        let fixed_now = self.width_check(rng)?;
        Ok(ObserveOutcome { mistake, constraints_added: added, fixed_now })
    }

    /// Fixes every active coordinate whose width fell below delta/2 to the
    /// nearest delta-grid value of a fresh sample; on any fix the epoch
    /// increments once and the constraint set re-initializes to the box
    /// over the remaining coordinates.
    pub fn width_check<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<usize>, ExogError> {
        let active = self.active();
        if active.is_empty() {
            return Ok(Vec::new());
        }
        let sys = self.system();
        let report = sys.widths().map_err(ExogError::from)?;
        let delta = self.cfg.delta;
        let triggered: Vec<usize> = (0..active.len())
            .filter(|&s| report.widths[s] + EXOG_TOL < delta / 2.0)
            .collect();
        if triggered.is_empty() {
            return Ok(Vec::new());
        }
        // round a representative interior value per collapsed coordinate
        let z = match sys.sample_uniform(rng, self.mixing_steps(active.len()), None) {
            Ok(z) => z,
            Err(PolytopeError::DegenerateInterior { .. }) => {
                // width ~ 0 somewhere: fall back to per-dimension midpoints
                let mut mid = alloc::vec![0.0; active.len()];
                for s in 0..active.len() {
                    let mut e = alloc::vec![0.0; active.len()];
                    e[s] = 1.0;
                    let (_, hi) = sys.solve_lp(&e, crate::polytope::Sense::Maximize)?;
                    let (_, lo) = sys.solve_lp(&e, crate::polytope::Sense::Minimize)?;
                    mid[s] = (hi + lo) / 2.0;
                }
                mid
            }
            Err(e) => return Err(e.into()),
        };
        let mut fixed_now = Vec::new();
        for &s in &triggered {
            let g = active[s];
            let w = ((z[s] / delta).round() * delta).clamp(0.0, 1.0);
            self.fixed[g] = Some(w);
            fixed_now.push(g);
        }
        self.epoch += 1;
        // epoch restart: constraint set back to the box of the survivors
        for row in self.ratio.iter_mut() {
            for cell in row.iter_mut() {
                *cell = None;
            }
        }
        for i in 0..self.n {
            self.lower[i] = 0.0;
            self.upper[i] = 1.0;
        }
        self.last_sample = None;
        Ok(fixed_now)
    }
}

/// One round of an exogenous-price run.
#[derive(Debug, Clone)]
pub struct ExogRound {
    pub t: usize,
    pub epoch: usize,
    pub mistake: bool,
    pub prices: PriceVector,
    pub predicted: Bundle,
    pub actual: Bundle,
    pub hypothesis: Vec<f64>,
    pub constraints_added: Vec<(Vec<f64>, f64)>,
    /// Active-coordinate widths, snapshotted every 10 rounds.
    pub widths: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ExogRunLog {
    pub mistakes: usize,
    pub epochs: usize,
    pub rounds: Vec<ExogRound>,
}

/// Adaptive price stream: sees the full public history before each round.
pub trait PriceSource {
    fn next_prices(&mut self, t: usize, history: &[ExogRound]) -> PriceVector;
}

/// Replays one fixed vector forever.
pub struct FixedPrices(pub PriceVector);

impl PriceSource for FixedPrices {
    fn next_prices(&mut self, _t: usize, _history: &[ExogRound]) -> PriceVector {
        self.0.clone()
    }
}

/// Each price uniform on the grid {step, 2 step, ..., 1}.
pub struct RandomGridPrices<R: Rng> {
    pub n: usize,
    pub step: f64,
    pub rng: R,
}

impl<R: Rng> PriceSource for RandomGridPrices<R> {
    fn next_prices(&mut self, _t: usize, _history: &[ExogRound]) -> PriceVector {
        let levels = (1.0 / self.step).round() as u64;
        let p: Vec<f64> = (0..self.n)
            .map(|_| self.rng.gen_range(1..=levels) as f64 * self.step)
            .collect();
        PriceVector::new(p).expect("grid prices are in (0,1]")
    }
}

/// Interleaves predict/observe against the simulated consumer for
/// `t_rounds` rounds. The consumer answers with `truth_policy`.
pub fn run_exog<R: Rng + ?Sized>(
    inst: &MarketInstance,
    source: &mut dyn PriceSource,
    t_rounds: usize,
    truth_policy: TieBreakPolicy,
    rng: &mut R,
    cfg: ExogConfig,
) -> Result<ExogRunLog, ExogError> {
    let mut state = LearnerState::new(inst.n, cfg);
    let mut rounds: Vec<ExogRound> = Vec::with_capacity(t_rounds);
    for t in 0..t_rounds {
        let p = source.next_prices(t, &rounds);
        let predicted = state.predict(&p, inst.budget, rng)?;
        let hypothesis = state.last_hypothesis().expect("predict stores a hypothesis").to_vec();
        let actual = best_bundle(inst, &p, truth_policy);
        let outcome = state.observe(&p, &actual, rng)?;
        let widths = if t % 10 == 0 {
            Some(state.system().widths().map_err(ExogError::from)?.widths)
        } else {
            None
        };
        rounds.push(ExogRound {
            t,
            epoch: state.epoch,
            mistake: outcome.mistake,
            prices: p,
            predicted,
            actual,
            hypothesis,
            constraints_added: outcome.constraints_added,
            widths,
        });
    }
    Ok(ExogRunLog { mistakes: state.mistakes, epochs: state.epoch, rounds })
}
