//! Shifted power method with Collatz-Wielandt brackets.
//!
//! Iterates `x_m = (Q + r I) x_{m-1}` from the all-ones vector and tracks
//! `l_m = min_a x_m[a] / x_{m-1}[a]` and `u_m = max_a` of the same ratio, which
//! satisfy `l_m <= rho(Q) + r <= u_m`. The shift keeps bipartite matrices from
//! oscillating.
//!
//! Matrices that split into a direct sum (the dimer-only matrices do) are
//! handled per connected component: coordinates of different components never
//! interact, so each component is normalized on its own and contributes its own
//! bracket. The lower bound is the best component lower bound and the upper
//! bound the largest component upper bound. Arithmetic is double precision;
//! brackets are not interval-certified against rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transfer::QuotientMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("shift must be positive, got {0}")]
    BadShift(f64),
    #[error("iterate has a non-positive component at orbit {index} (value {value})")]
    NonPositive { index: usize, value: f64 },
    #[error("iterate is not finite at orbit {index}")]
    NotFinite { index: usize },
    #[error("matrix is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub shift: f64,
    /// Relative bracket width `(u - l) / u` at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { shift: 1.0, tolerance: 1e-12, max_iterations: 1_000_000 }
    }
}

/// Bracket on the spectral radius, shift already removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBracket {
    pub lower: f64,
    pub upper: f64,
    pub rayleigh: f64,
    pub iterations: u64,
    pub shift: f64,
    pub converged: bool,
}

impl SpectralBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn overlaps(&self, other: &SpectralBracket) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// One iteration's raw (shifted) bounds, exposed for monitoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationBounds {
    pub lower: f64,
    pub upper: f64,
    pub rayleigh: f64,
}

#[derive(Debug, Clone)]
pub struct PowerResult {
    pub bracket: SpectralBracket,
    /// Eigenvector estimate on the dominant component, zero elsewhere,
    /// unit length in the weighted inner product.
    pub eigenvector: Vec<f64>,
    /// Connected component of the dominant estimate.
    pub component: usize,
}

/// Float copy of a quotient matrix in compressed row form.
#[derive(Debug, Clone)]
pub struct WeightedOperator {
    offsets: Vec<usize>,
    columns: Vec<u32>,
    values: Vec<f64>,
    weights: Vec<f64>,
    component: Vec<usize>,
    components: usize,
}

impl WeightedOperator {
    pub fn from_quotient(q: &QuotientMatrix) -> Self {
        let mut offsets = Vec::with_capacity(q.order() + 1);
        let mut columns = Vec::with_capacity(q.nonzeros());
        let mut values = Vec::with_capacity(q.nonzeros());
        offsets.push(0);
        for a in 0..q.order() {
            for &(b, v) in q.row(a) {
                columns.push(b);
                values.push(v as f64);
            }
            offsets.push(columns.len());
        }
        let weights = q.weights().iter().map(|&w| w as f64).collect();
        Self::from_parts(offsets, columns, values, weights)
    }

    /// Dense input, for small test matrices. `weights` must make it self-adjoint.
    pub fn from_dense(matrix: &[Vec<f64>], weights: &[f64]) -> Self {
        let mut offsets = vec![0];
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for row in matrix {
            for (b, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    columns.push(b as u32);
                    values.push(v);
                }
            }
            offsets.push(columns.len());
        }
        Self::from_parts(offsets, columns, values, weights.to_vec())
    }

    fn from_parts(offsets: Vec<usize>, columns: Vec<u32>, values: Vec<f64>, weights: Vec<f64>) -> Self {
        let n = offsets.len() - 1;
        // connected components of the nonzero pattern (symmetric for self-adjoint input)
        let mut component = vec![usize::MAX; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = components;
            stack.push(start);
            while let Some(a) = stack.pop() {
                for &b in &columns[offsets[a]..offsets[a + 1]] {
                    let b = b as usize;
                    if component[b] == usize::MAX {
                        component[b] = components;
                        stack.push(b);
                    }
                }
            }
            components += 1;
        }
        Self { offsets, columns, values, weights, component, components }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component_of(&self, a: usize) -> usize {
        self.component[a]
    }

    /// `y = Q x + shift * x`; rows are independent so the result does not
    /// depend on the thread count.
    pub fn apply_shifted(&self, x: &[f64], shift: f64, y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(64).for_each(|(a, out)| {
            let lo = self.offsets[a];
            let hi = self.offsets[a + 1];
            let mut sum = shift * x[a];
            for (c, v) in self.columns[lo..hi].iter().zip(&self.values[lo..hi]) {
                sum += v * x[*c as usize];
            }
            *out = sum;
        });
    }

    /// `max_a |(Q v)_a - rho v_a| / (rho max_a |v_a|)`.
    pub fn relative_residual(&self, v: &[f64], rho: f64) -> f64 {
        let mut qv = vec![0.0; v.len()];
        self.apply_shifted(v, 0.0, &mut qv);
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let worst = qv.iter().zip(v).fold(0.0f64, |m, (a, b)| m.max((a - rho * b).abs()));
        worst / (rho.abs() * scale)
    }
}

/// Power iteration on `op`; `observe` sees the per-iteration shifted bounds.
pub fn power_method_observed(
    op: &WeightedOperator,
    options: &PowerOptions,
    mut observe: impl FnMut(u64, IterationBounds),
) -> Result<PowerResult, SpectralError> {
    let shift = options.shift;
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(SpectralError::BadShift(shift));
    }
    let n = op.dim();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let k = op.components();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    let mut rayleigh = f64::NAN;
    let mut dominant = 0;
    let mut iterations = 0;
    let mut converged = false;

    let mut low = vec![f64::INFINITY; k];
    let mut high = vec![f64::NEG_INFINITY; k];
    let mut num = vec![0.0; k];
    let mut den = vec![0.0; k];
    let mut norm = vec![0.0; k];

    while iterations < options.max_iterations {
        op.apply_shifted(&x, shift, &mut y);
        iterations += 1;

        low.fill(f64::INFINITY);
        high.fill(f64::NEG_INFINITY);
        num.fill(0.0);
        den.fill(0.0);
        norm.fill(0.0);
        for a in 0..n {
            let (xa, ya) = (x[a], y[a]);
            if !ya.is_finite() {
                return Err(SpectralError::NotFinite { index: a });
            }
            if ya <= 0.0 {
                return Err(SpectralError::NonPositive { index: a, value: ya });
            }
            let c = op.component[a];
            let ratio = ya / xa;
            low[c] = low[c].min(ratio);
            high[c] = high[c].max(ratio);
            let w = op.weights[a];
            num[c] += w * ya * xa;
            den[c] += w * xa * xa;
            norm[c] += w * ya * ya;
        }

        let mut step_lower = f64::NEG_INFINITY;
        let mut step_upper = f64::NEG_INFINITY;
        let mut step_component = 0;
        for c in 0..k {
            if low[c] > step_lower {
                step_lower = low[c];
                step_component = c;
            }
            step_upper = step_upper.max(high[c]);
        }
        let step_rayleigh = num[step_component] / den[step_component];
        observe(iterations, IterationBounds { lower: step_lower, upper: step_upper, rayleigh: step_rayleigh });

        if step_lower > best_lower {
            best_lower = step_lower;
            dominant = step_component;
            rayleigh = step_rayleigh;
        }
        best_upper = best_upper.min(step_upper);

        for a in 0..n {
            x[a] = y[a] / norm[op.component[a]].sqrt();
        }
        if best_upper - best_lower <= options.tolerance * best_upper.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    let rayleigh = rayleigh.clamp(best_lower, best_upper);
    let eigenvector = x.iter().enumerate().map(|(a, &v)| if op.component[a] == dominant { v } else { 0.0 }).collect();
    Ok(PowerResult {
        bracket: SpectralBracket {
            lower: best_lower - shift,
            upper: best_upper - shift,
            rayleigh: rayleigh - shift,
            iterations,
            shift,
            converged,
        },
        eigenvector,
        component: dominant,
    })
}

pub fn power_method(op: &WeightedOperator, options: &PowerOptions) -> Result<PowerResult, SpectralError> {
    power_method_observed(op, options, |_, _| {})
}

/// Spectral radius bracket of a quotient matrix.
pub fn spectral_radius(q: &QuotientMatrix, options: &PowerOptions) -> Result<PowerResult, SpectralError> {
    power_method(&WeightedOperator::from_quotient(q), options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &[&[f64]]) -> WeightedOperator {
        let rows: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
        WeightedOperator::from_dense(&rows, &vec![1.0; rows.len()])
    }

    #[test]
    fn one_by_one_collapses() {
        let r = power_method(&dense(&[&[5.0]]), &PowerOptions::default()).unwrap();
        assert!(r.bracket.converged);
        assert_eq!(r.bracket.iterations, 1);
        assert!((r.bracket.lower - 5.0).abs() < 1e-12 && (r.bracket.upper - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bipartite_swap_converges_with_shift() {
        let op = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = power_method(&op, &PowerOptions::default()).unwrap();
        assert!(r.bracket.converged);
        assert!(r.bracket.contains(1.0));
        // a path on three vertices is bipartite with rho = sqrt(2)
        let path = dense(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let r = power_method(&path, &PowerOptions::default()).unwrap();
        assert!(r.bracket.converged);
        assert!((r.bracket.rayleigh - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn direct_sum_uses_dominant_component() {
        let op = dense(&[&[2.0, 1.0, 0.0, 0.0], &[1.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 0.0]]);
        assert_eq!(op.components(), 2);
        let r = power_method(&op, &PowerOptions::default()).unwrap();
        assert!(r.bracket.converged);
        assert!((r.bracket.rayleigh - 3.0).abs() < 1e-10);
        assert_eq!(r.eigenvector[2], 0.0);
        assert!(op.relative_residual(&r.eigenvector, r.bracket.rayleigh) < 1e-10);
    }

    #[test]
    fn weighted_inner_product_case() {
        // a quotient with weights (1, 2): w_a q_ab = w_b q_ba
        let rows = vec![vec![1.0, 2.0], vec![1.0, 1.0]];
        let op = WeightedOperator::from_dense(&rows, &[1.0, 2.0]);
        let r = power_method(&op, &PowerOptions::default()).unwrap();
        assert!((r.bracket.rayleigh - (1.0 + 2f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn not_converged_is_still_a_bracket() {
        let op = dense(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]]);
        let opts = PowerOptions { max_iterations: 3, ..Default::default() };
        let r = power_method(&op, &opts).unwrap();
        assert!(!r.bracket.converged);
        assert!(r.bracket.contains(1.0 + 2f64.sqrt()));
        assert!(r.bracket.width() > 0.0);
    }

    #[test]
    fn errors() {
        let op = dense(&[&[1.0]]);
        assert!(matches!(
            power_method(&op, &PowerOptions { shift: 0.0, ..Default::default() }),
            Err(SpectralError::BadShift(_))
        ));
        let bad = dense(&[&[f64::INFINITY]]);
        assert!(matches!(power_method(&bad, &PowerOptions::default()), Err(SpectralError::NotFinite { .. })));
        let neg = dense(&[&[-5.0]]);
        assert!(matches!(power_method(&neg, &PowerOptions::default()), Err(SpectralError::NonPositive { .. })));
    }
}
