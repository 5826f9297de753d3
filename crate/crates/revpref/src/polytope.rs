//! Geometry engine for the exogenous-price learner: H-representation
//! polytopes inside the unit box, width computation via linear programs, and
//! approximately-uniform interior sampling by hit-and-run. The LP solver is
//! a dense two-phase tableau simplex with Bland's rule; problem sizes here
//! are tiny, so simplicity wins over sparsity.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

/// Pivot eligibility and feasibility tolerance inside the simplex.
const LP_TOL: f64 = 1e-9;
/// Additive tolerance on reported optima.
pub const LP_VALUE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeError {
    /// Empty polytope: the observation stream was inconsistent.
    Infeasible,
    /// Impossible inside the unit box; an internal error if it surfaces.
    Unbounded,
    /// Some width collapsed below 1e-9; the caller must fix that coordinate
    /// before sampling.
    DegenerateInterior { dim: usize },
    /// Simplex pivot budget exhausted; numerical trouble.
    IterationLimit,
}

impl fmt::Display for PolytopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolytopeError::Infeasible => write!(f, "polytope is empty"),
            PolytopeError::Unbounded => write!(f, "objective unbounded (broken box constraint)"),
            PolytopeError::DegenerateInterior { dim } => {
                write!(f, "interior degenerate in dimension {}", dim)
            }
            PolytopeError::IterationLimit => write!(f, "simplex iteration limit exceeded"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Per-dimension widths `max z_i - min z_i` over the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthReport {
    pub widths: Vec<f64>,
}

/// Intersection of the unit box `[0,1]^d` with halfspaces `a . z >= b`.
/// Constraint rows are rescaled to unit max-norm and deduplicated on entry.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceSystem {
    dims: usize,
    constraints: Vec<(Vec<f64>, f64)>,
}

/// Default hit-and-run mixing budget for dimension `d`.
pub fn default_mixing_steps(d: usize) -> usize {
    1000 + 100 * d * d
}

impl HalfspaceSystem {
    pub fn new(dims: usize) -> Self {
        HalfspaceSystem { dims, constraints: Vec::new() }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.constraints
    }

    /// Adds `a . z >= b`; returns false when the row duplicates an existing
    /// one (after max-norm rescaling, tolerance 1e-12) and was dropped.
    pub fn add_constraint(&mut self, a: Vec<f64>, b: f64) -> bool {
        assert_eq!(a.len(), self.dims, "constraint arity mismatch");
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale <= 1e-300 {
            // contentless row: either trivially true or trivially false;
            // keep the false case so infeasibility is reported
            if b <= 1e-12 {
                return false;
            }
            self.constraints.push((a, b));
            return true;
        }
        let row: Vec<f64> = a.iter().map(|x| x / scale).collect();
        let off = b / scale;
        for (ea, eb) in &self.constraints {
            if (eb - off).abs() <= 1e-12
                && ea.iter().zip(&row).all(|(x, y)| (x - y).abs() <= 1e-12)
            {
                return false;
            }
        }
        self.constraints.push((row, off));
        true
    }

    /// Every constraint and box bound satisfied with slack >= -tol.
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dims
            && z.iter().all(|&x| x >= -tol && x <= 1.0 + tol)
            && self.constraints.iter().all(|(a, b)| {
                let dot: f64 = a.iter().zip(z).map(|(x, y)| x * y).sum();
                dot >= b - tol
            })
    }

    /// Optimizes `objective . z` over the polytope.
    pub fn solve_lp(
        &self,
        objective: &[f64],
        sense: Sense,
    ) -> Result<(Vec<f64>, f64), PolytopeError> {
        assert_eq!(objective.len(), self.dims);
        if self.dims == 0 {
            if self.constraints.iter().any(|(_, b)| *b > 1e-12) {
                return Err(PolytopeError::Infeasible);
            }
            return Ok((Vec::new(), 0.0));
        }
        let obj: Vec<f64> = match sense {
            Sense::Maximize => objective.to_vec(),
            Sense::Minimize => objective.iter().map(|x| -x).collect(),
        };
        let (point, value) = simplex_box(&obj, &self.constraints, self.dims)?;
        match sense {
            Sense::Maximize => Ok((point, value)),
            Sense::Minimize => Ok((point, -value)),
        }
    }

    /// `width_i = max z_i - min z_i`.
    pub fn width(&self, dim: usize) -> Result<f64, PolytopeError> {
        let mut e = alloc::vec![0.0; self.dims];
        e[dim] = 1.0;
        let (_, hi) = self.solve_lp(&e, Sense::Maximize)?;
        let (_, lo) = self.solve_lp(&e, Sense::Minimize)?;
        Ok((hi - lo).max(0.0))
    }

    pub fn widths(&self) -> Result<WidthReport, PolytopeError> {
        let widths = (0..self.dims)
            .map(|i| self.width(i))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(WidthReport { widths })
    }

    /// A strictly feasible starting point: the per-dimension LP midpoint
    /// vector, chord-shrunk toward the (feasible) average of the 2d LP
    /// optimizers when the midpoint itself falls outside.
    pub fn interior_point(&self) -> Result<Vec<f64>, PolytopeError> {
        let d = self.dims;
        if d == 0 {
            return Ok(Vec::new());
        }
        let mut anchor = alloc::vec![0.0; d];
        let mut midpoint = alloc::vec![0.0; d];
        for i in 0..d {
            let mut e = alloc::vec![0.0; d];
            e[i] = 1.0;
            let (pmax, hi) = self.solve_lp(&e, Sense::Maximize)?;
            let (pmin, lo) = self.solve_lp(&e, Sense::Minimize)?;
            for j in 0..d {
                anchor[j] += (pmax[j] + pmin[j]) / (2.0 * d as f64);
            }
            midpoint[i] = (hi + lo) / 2.0;
        }
        if self.contains(&midpoint, 1e-9) {
            return Ok(midpoint);
        }
        // anchor is a convex combination of feasible points; walk the chord
        let mut lo = 0.0f64; // toward anchor: feasible
        let mut hi = 1.0f64; // toward midpoint: infeasible
        for _ in 0..60 {
            let mid = (lo + hi) / 2.0;
            let p: Vec<f64> = (0..d)
                .map(|j| anchor[j] + mid * (midpoint[j] - anchor[j]))
                .collect();
            if self.contains(&p, 1e-9) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0..d).map(|j| anchor[j] + lo * (midpoint[j] - anchor[j])).collect())
    }

    /// Hit-and-run walk of `steps` moves, restarted from `warm` when it is
    /// still feasible. The returned point satisfies every constraint with
    /// slack >= -1e-9.
    pub fn sample_uniform<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        steps: usize,
        warm: Option<&[f64]>,
    ) -> Result<Vec<f64>, PolytopeError> {
        let d = self.dims;
        if d == 0 {
            return Ok(Vec::new());
        }
        let report = self.widths()?;
        if let Some(dim) = report.widths.iter().position(|&w| w < 1e-9) {
            return Err(PolytopeError::DegenerateInterior { dim });
        }
        let mut x = match warm {
            Some(w) if self.contains(w, 1e-9) => w.to_vec(),
            _ => self.interior_point()?,
        };

        for _ in 0..steps {
            let u: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
            let norm: f64 = u.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let u: Vec<f64> = u.iter().map(|t| t / norm).collect();

            let mut t_lo = f64::NEG_INFINITY;
            let mut t_hi = f64::INFINITY;
            for i in 0..d {
                if u[i] > LP_TOL {
                    t_hi = t_hi.min((1.0 - x[i]) / u[i]);
                    t_lo = t_lo.max(-x[i] / u[i]);
                } else if u[i] < -LP_TOL {
                    t_hi = t_hi.min(-x[i] / u[i]);
                    t_lo = t_lo.max((1.0 - x[i]) / u[i]);
                }
            }
            for (a, b) in &self.constraints {
                let au: f64 = a.iter().zip(&u).map(|(p, q)| p * q).sum();
                let ax: f64 = a.iter().zip(&x).map(|(p, q)| p * q).sum();
                if au > LP_TOL {
                    t_lo = t_lo.max((b - ax) / au);
                } else if au < -LP_TOL {
                    t_hi = t_hi.min((b - ax) / au);
                }
            }
            if !(t_hi > t_lo) || !t_lo.is_finite() || !t_hi.is_finite() {
                continue; // grazing chord; keep the current point
            }
            let t = t_lo + rng.gen::<f64>() * (t_hi - t_lo);
            for i in 0..d {
                x[i] = (x[i] + t * u[i]).clamp(0.0, 1.0);
            }
        }
        debug_assert!(self.contains(&x, 1e-9));
        Ok(x)
    }
}

/// Standard normal via Box-Muller; avoids a distribution dependency.
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

/// Maximizes `obj . x` over `{x in [0,1]^d : a . x >= b for all rows}` with
/// a dense two-phase tableau simplex, Bland's rule throughout.
fn simplex_box(
    obj: &[f64],
    rows_ge: &[(Vec<f64>, f64)],
    d: usize,
) -> Result<(Vec<f64>, f64), PolytopeError> {
    // rewrite as A x <= b: general rows negated, plus x_i <= 1
    let mut a_rows: Vec<Vec<f64>> = Vec::with_capacity(rows_ge.len() + d);
    let mut b_vec: Vec<f64> = Vec::with_capacity(rows_ge.len() + d);
    for (a, b) in rows_ge {
        a_rows.push(a.iter().map(|x| -x).collect());
        b_vec.push(-b);
    }
    for i in 0..d {
        let mut e = alloc::vec![0.0; d];
        e[i] = 1.0;
        a_rows.push(e);
        b_vec.push(1.0);
    }
    let m = a_rows.len();

    // columns: d structural, m slacks, then one artificial per negative-rhs
    // row, then rhs
    let neg: Vec<bool> = b_vec.iter().map(|&b| b < 0.0).collect();
    let n_art = neg.iter().filter(|&&x| x).count();
    let ncols = d + m + n_art;
    let mut t = alloc::vec![alloc::vec![0.0; ncols + 1]; m];
    let mut basis = alloc::vec![0usize; m];
    let mut art_col = d + m;
    for i in 0..m {
        let sign = if neg[i] { -1.0 } else { 1.0 };
        for j in 0..d {
            t[i][j] = sign * a_rows[i][j];
        }
        t[i][d + i] = sign;
        t[i][ncols] = sign * b_vec[i];
        if neg[i] {
            t[i][art_col] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        } else {
            basis[i] = d + i;
        }
    }

    if n_art > 0 {
        // phase 1: drive the artificials to zero
        let cost = |j: usize| if j >= d + m { -1.0 } else { 0.0 };
        let z1 = run_simplex(&mut t, &mut basis, ncols, &cost, d + m)?;
        if z1 < -LP_VALUE_TOL {
            return Err(PolytopeError::Infeasible);
        }
        // pivot lingering zero-level artificials out of the basis
        for i in 0..m {
            if basis[i] >= d + m {
                if let Some(j) = (0..d + m).find(|&j| t[i][j].abs() > LP_TOL) {
                    pivot(&mut t, &mut basis, i, j, ncols);
                }
            }
        }
    }

    let cost = |j: usize| if j < d { obj[j] } else { 0.0 };
    let z2 = run_simplex(&mut t, &mut basis, ncols, &cost, d + m)?;

    let mut x = alloc::vec![0.0; d];
    for i in 0..m {
        if basis[i] < d {
            x[basis[i]] = t[i][ncols].clamp(0.0, 1.0);
        }
    }
    Ok((x, z2))
}

/// Runs Bland-rule pivots until no reduced cost is positive; columns at
/// `allowed_cols` and beyond are barred from entering. Returns the final
/// objective value.
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    ncols: usize,
    cost: &dyn Fn(usize) -> f64,
    allowed_cols: usize,
) -> Result<f64, PolytopeError> {
    let m = t.len();
    let mut reduced: Vec<f64> = (0..ncols)
        .map(|j| cost(j) - (0..m).map(|i| cost(basis[i]) * t[i][j]).sum::<f64>())
        .collect();
    let mut z: f64 = (0..m).map(|i| cost(basis[i]) * t[i][ncols]).sum();

    for _ in 0..50_000 {
        let enter = match (0..allowed_cols).find(|&j| reduced[j] > LP_TOL) {
            Some(j) => j,
            None => return Ok(z),
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > LP_TOL {
                let ratio = t[i][ncols] / t[i][enter];
                if ratio < best - LP_TOL
                    || (ratio < best + LP_TOL
                        && leave.map_or(true, |l| basis[i] < basis[l]))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let leave = leave.ok_or(PolytopeError::Unbounded)?;
        pivot(t, basis, leave, enter, ncols);
        let factor = reduced[enter];
        z += factor * t[leave][ncols];
        for j in 0..ncols {
            reduced[j] -= factor * t[leave][j];
        }
        reduced[enter] = 0.0;
    }
    Err(PolytopeError::IterationLimit)
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, ncols: usize) {
    let piv = t[row][col];
    for j in 0..=ncols {
        t[row][j] /= piv;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let f = t[i][col];
            for j in 0..=ncols {
                t[i][j] -= f * t[row][j];
            }
            t[i][col] = 0.0;
        }
    }
    basis[row] = col;
}
