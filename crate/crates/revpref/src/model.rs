//! Shared domain types: market instances, prices, bundles, and the
//! bang-per-buck primitive every other module is built on.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// in the no_std build, f64 rounding comes from num-traits/libm; redundant
// under cfg(test) where std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Absolute tolerance for bundle/spend equality comparisons.
pub const SPEND_TOL: f64 = 1e-9;

/// Relative tolerance used when deciding that two bang-per-buck ratios tie.
pub const RATIO_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// `v_i` is not a positive integer multiple of delta in (0, 1].
    ValuationOffGrid { index: usize, value: f64 },
    CostOutOfRange { index: usize, value: f64 },
    NegativeBudget { budget: f64 },
    /// 1/delta must be an integer and delta in (0, 1].
    BadDelta { delta: f64 },
    PriceOutOfRange { index: usize, value: f64 },
    DimensionMismatch { expected: usize, got: usize },
    EmptyInstance,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::ValuationOffGrid { index, value } => {
                write!(f, "v_{} = {} not on delta-grid", index + 1, value)
            }
            ModelError::CostOutOfRange { index, value } => {
                write!(f, "c_{} = {} outside [0,1]", index + 1, value)
            }
            ModelError::NegativeBudget { budget } => write!(f, "negative budget {}", budget),
            ModelError::BadDelta { delta } => {
                write!(f, "delta = {} is not a unit fraction in (0,1]", delta)
            }
            ModelError::PriceOutOfRange { index, value } => {
                write!(f, "p_{} = {} outside (0,1]", index + 1, value)
            }
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "expected {} coordinates, got {}", expected, got)
            }
            ModelError::EmptyInstance => write!(f, "instance has no goods"),
        }
    }
}

/// Ground truth for a simulated market: valuations `v` on the delta grid,
/// unit costs `c`, consumer budget and the discretization increment.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    pub n: usize,
    pub v: Vec<f64>,
    pub c: Vec<f64>,
    pub budget: f64,
    pub delta: f64,
}

impl MarketInstance {
    pub fn new(v: Vec<f64>, c: Vec<f64>, budget: f64, delta: f64) -> Result<Self, ModelError> {
        let n = v.len();
        let inst = MarketInstance { n, v, c, budget, delta };
        validate_instance(&inst)?;
        Ok(inst)
    }

    /// Grid multiple of `v_i`, i.e. the integer `V_i` with `v_i = V_i * delta`.
    pub fn grid_multiple(&self, i: usize) -> u32 {
        (self.v[i] / self.delta).round() as u32
    }

    /// 1/delta as an integer.
    pub fn grid_levels(&self) -> u32 {
        (1.0 / self.delta).round() as u32
    }
}

/// Checks every instance invariant, reporting the first violation.
pub fn validate_instance(inst: &MarketInstance) -> Result<(), ModelError> {
    if inst.n == 0 {
        return Err(ModelError::EmptyInstance);
    }
    if inst.v.len() != inst.n {
        return Err(ModelError::DimensionMismatch { expected: inst.n, got: inst.v.len() });
    }
    if inst.c.len() != inst.n {
        return Err(ModelError::DimensionMismatch { expected: inst.n, got: inst.c.len() });
    }
    if !(inst.delta > 0.0 && inst.delta <= 1.0)
        || ((1.0 / inst.delta) - (1.0 / inst.delta).round()).abs() > 1e-9
    {
        return Err(ModelError::BadDelta { delta: inst.delta });
    }
    for (i, &vi) in inst.v.iter().enumerate() {
        let mult = vi / inst.delta;
        // valuations are lower-bounded by delta: zero multiples rejected
        if !(vi > 0.0 && vi <= 1.0 + 1e-12) || (mult - mult.round()).abs() > 1e-9 || mult < 0.5 {
            return Err(ModelError::ValuationOffGrid { index: i, value: vi });
        }
    }
    for (i, &ci) in inst.c.iter().enumerate() {
        if !(0.0..=1.0).contains(&ci) {
            return Err(ModelError::CostOutOfRange { index: i, value: ci });
        }
    }
    if inst.budget < 0.0 {
        return Err(ModelError::NegativeBudget { budget: inst.budget });
    }
    Ok(())
}

/// Per-good prices, each in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    pub fn new(p: Vec<f64>) -> Result<Self, ModelError> {
        for (i, &pi) in p.iter().enumerate() {
            if !(pi > 0.0 && pi <= 1.0 + 1e-12) {
                return Err(ModelError::PriceOutOfRange { index: i, value: pi });
            }
        }
        Ok(PriceVector(p))
    }

    pub fn ones(n: usize) -> Self {
        PriceVector(alloc::vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl core::ops::Index<usize> for PriceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Fractional purchase vector, coordinates in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle(pub Vec<f64>);

impl Bundle {
    pub fn zeros(n: usize) -> Self {
        Bundle(alloc::vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(x, y)| x * y).sum()
    }

    pub fn spend(&self, p: &PriceVector) -> f64 {
        self.dot(p.as_slice())
    }

    /// Merchant profit `x . (p - c)`.
    pub fn profit(&self, p: &PriceVector, c: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(p.as_slice())
            .zip(c)
            .map(|((x, pi), ci)| x * (pi - ci))
            .sum()
    }

    /// Index of the strictly fractional coordinate, if any.
    pub fn fractional_index(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|&x| x > SPEND_TOL && x < 1.0 - SPEND_TOL)
    }

    pub fn approx_eq(&self, other: &Bundle, tol: f64) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Ratios `r_i = v_i / p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BangPerBuck(pub Vec<f64>);

/// `r_i = v_i / p_i`; prices are strictly positive by construction.
pub fn bang_per_buck(v: &[f64], p: &PriceVector) -> BangPerBuck {
    debug_assert_eq!(v.len(), p.len());
    BangPerBuck(v.iter().zip(p.as_slice()).map(|(vi, pi)| vi / pi).collect())
}

/// True when two ratios tie under the relative tolerance used for greedy
/// purchase ordering.
pub fn ratios_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= RATIO_TIE_TOL * a.abs().max(b.abs())
}

pub fn error_string(e: &ModelError) -> String {
    alloc::format!("{}", e)
}
