//! Entropy bounds: spectral-radius bounds on `h_2`, `h~_2`, `h_3`, `h~_3`,
//! permanent-based closed forms for the density-constrained entropy, and the
//! exact one-dimensional formulas. Logarithms are natural throughout.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticeError, LatticeShape};
use crate::matchcount::Kind;
use crate::spectral::{spectral_radius, PowerOptions, SpectralBracket, SpectralError};
use crate::transfer::{rigid_quotient, TransferError};

/// Largest cross-section for which `log beta` is computed.
pub const MAX_DESK_POINTS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("shape {shape} has {points} points; spectral computations are limited to {max}")]
    Capacity { shape: String, points: usize, max: usize },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `log beta(m')` (or `log beta~(m')`) as a bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBeta {
    pub dims: Vec<usize>,
    pub dimer_only: bool,
    /// Orbit count of the reduced matrix; zero for the degenerate conventions.
    pub orbits: usize,
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub iterations: u64,
    pub converged: bool,
}

impl LogBeta {
    fn exact(dims: &[usize], dimer_only: bool, value: f64) -> Self {
        Self {
            dims: dims.to_vec(),
            dimer_only,
            orbits: 0,
            lower: value,
            upper: value,
            estimate: value,
            iterations: 0,
            converged: true,
        }
    }

    fn from_bracket(dims: &[usize], dimer_only: bool, orbits: usize, b: &SpectralBracket) -> Self {
        let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        Self {
            dims: dims.to_vec(),
            dimer_only,
            orbits,
            lower: ln(b.lower),
            upper: ln(b.upper),
            estimate: ln(b.rayleigh),
            iterations: b.iterations,
            converged: b.converged,
        }
    }

    pub fn points(&self) -> usize {
        self.dims.iter().product()
    }

    /// `log beta / |m'|_pr`.
    pub fn per_site(&self) -> f64 {
        self.estimate / self.points() as f64
    }
}

/// Computes and caches `log beta` brackets.
#[derive(Debug, Default)]
pub struct BetaSolver {
    options: PowerOptions,
    cache: Mutex<HashMap<(Vec<usize>, bool), LogBeta>>,
}

impl BetaSolver {
    pub fn new(options: PowerOptions) -> Self {
        Self { options, cache: Mutex::new(HashMap::new()) }
    }

    pub fn options(&self) -> &PowerOptions {
        &self.options
    }

    /// Every bracket computed so far, in canonical (descending) axis order.
    pub fn computed(&self) -> Vec<LogBeta> {
        let mut all: Vec<LogBeta> = self.cache.lock().expect("cache lock").values().cloned().collect();
        all.sort_by(|a, b| (a.dimer_only, a.points(), &a.dims).cmp(&(b.dimer_only, b.points(), &b.dims)));
        all
    }

    /// `log beta(dims)`. A zero entry follows the conventions `beta(0) = 2`
    /// and `beta(n, 0) = beta(0, n) = 2^n` (same for the dimer-only variant).
    pub fn log_beta(&self, dims: &[usize], dimer_only: bool) -> Result<LogBeta, BoundsError> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(BoundsError::Parameters(format!("cross-section {dims:?} must have 1 to 3 dimensions")));
        }
        if dims.contains(&0) {
            let nonzero: Vec<usize> = dims.iter().copied().filter(|&m| m != 0).collect();
            if nonzero.len() + 1 != dims.len() {
                return Err(BoundsError::Parameters(format!("at most one zero dimension allowed, got {dims:?}")));
            }
            let n: usize = nonzero.iter().product();
            return Ok(LogBeta::exact(dims, dimer_only, n as f64 * std::f64::consts::LN_2));
        }
        let shape = LatticeShape::new(dims.to_vec())?;
        if shape.points() > MAX_DESK_POINTS {
            return Err(BoundsError::Capacity {
                shape: shape.to_string(),
                points: shape.points(),
                max: MAX_DESK_POINTS,
            });
        }
        // beta is invariant under permuting the axes
        let mut key = dims.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&(key.clone(), dimer_only)) {
            let mut hit = hit.clone();
            hit.dims = dims.to_vec();
            return Ok(hit);
        }
        let canonical = LatticeShape::new(key.clone())?;
        let quotient = rigid_quotient(&canonical, Kind::B, dimer_only)?;
        let result = spectral_radius(&quotient, &self.options)?;
        let value = LogBeta::from_bracket(&key, dimer_only, quotient.order(), &result.bracket);
        self.cache.lock().expect("cache lock").insert((key, dimer_only), value.clone());
        let mut value = value;
        value.dims = dims.to_vec();
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "h2")]
    H2,
    #[serde(rename = "h2t")]
    H2Dimer,
    #[serde(rename = "h3")]
    H3,
    #[serde(rename = "h3t")]
    H3Dimer,
}

impl Target {
    pub fn dimer_only(self) -> bool {
        matches!(self, Target::H2Dimer | Target::H3Dimer)
    }

    pub fn dimension(self) -> usize {
        match self {
            Target::H2 | Target::H2Dimer => 2,
            Target::H3 | Target::H3Dimer => 3,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::H2 => "h2",
            Target::H2Dimer => "h2t",
            Target::H3 => "h3",
            Target::H3Dimer => "h3t",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBound {
    pub target: Target,
    pub direction: Direction,
    /// Bound evaluated with the pessimistic bracket end of every `log beta`.
    pub value: f64,
    /// The same expression evaluated at the Rayleigh estimates.
    pub estimate: f64,
    pub parameters: BTreeMap<String, usize>,
    pub formula: String,
}

fn params(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// `log beta(2r)/2r >= h_2 >= (log beta(p+2q) - log beta(2q))/p`, and the
/// dimer-only analogue.
pub fn h2_bounds(
    solver: &BetaSolver,
    r: usize,
    p: usize,
    q: usize,
    dimer_only: bool,
) -> Result<(EntropyBound, EntropyBound), BoundsError> {
    if r == 0 || p == 0 {
        return Err(BoundsError::Parameters("r and p must be at least 1".into()));
    }
    let target = if dimer_only { Target::H2Dimer } else { Target::H2 };
    let top = solver.log_beta(&[2 * r], dimer_only)?;
    let upper = EntropyBound {
        target,
        direction: Direction::Upper,
        value: top.upper / (2 * r) as f64,
        estimate: top.estimate / (2 * r) as f64,
        parameters: params(&[("r", r)]),
        formula: "log beta(2r) / 2r".into(),
    };
    let a = solver.log_beta(&[p + 2 * q], dimer_only)?;
    let b = solver.log_beta(&[2 * q], dimer_only)?;
    let lower = EntropyBound {
        target,
        direction: Direction::Lower,
        value: (a.lower - b.upper) / p as f64,
        estimate: (a.estimate - b.estimate) / p as f64,
        parameters: params(&[("p", p), ("q", q)]),
        formula: "(log beta(p+2q) - log beta(2q)) / p".into(),
    };
    Ok((upper, lower))
}

/// Parameters of the three-dimensional bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct H3Params {
    pub r: usize,
    pub t: usize,
    pub p: usize,
    pub q: usize,
    pub u: usize,
    pub s: usize,
    pub v: usize,
}

/// `log beta(2r,2t)/4rt >= h_3 >=
///  (log beta(p+2q, u+2s) - log beta(p+2q, 2s))/up - log beta(2q, 2v)/2vp`,
/// and the dimer-only analogue.
pub fn h3_bounds(
    solver: &BetaSolver,
    k: H3Params,
    dimer_only: bool,
) -> Result<(EntropyBound, EntropyBound), BoundsError> {
    let H3Params { r, t, p, q, u, s, v } = k;
    if [r, t, p, u, v].contains(&0) {
        return Err(BoundsError::Parameters("r, t, p, u, v must be at least 1".into()));
    }
    let target = if dimer_only { Target::H3Dimer } else { Target::H3 };
    let top = solver.log_beta(&[2 * r, 2 * t], dimer_only)?;
    let area = (4 * r * t) as f64;
    let upper = EntropyBound {
        target,
        direction: Direction::Upper,
        value: top.upper / area,
        estimate: top.estimate / area,
        parameters: params(&[("r", r), ("t", t)]),
        formula: "log beta(2r,2t) / 4rt".into(),
    };
    let a = solver.log_beta(&[p + 2 * q, u + 2 * s], dimer_only)?;
    let b = solver.log_beta(&[p + 2 * q, 2 * s], dimer_only)?;
    let c = solver.log_beta(&[2 * q, 2 * v], dimer_only)?;
    let up = (u * p) as f64;
    let vp = (2 * v * p) as f64;
    let lower = EntropyBound {
        target,
        direction: Direction::Lower,
        value: (a.lower - b.upper) / up - c.upper / vp,
        estimate: (a.estimate - b.estimate) / up - c.estimate / vp,
        parameters: params(&[("p", p), ("q", q), ("u", u), ("s", s), ("v", v)]),
        formula: "(log beta(p+2q,u+2s) - log beta(p+2q,2s)) / up - log beta(2q,2v) / 2vp".into(),
    };
    Ok((upper, lower))
}

/// True when every lower bound is at most every upper bound of the same target.
pub fn consistent(bounds: &[EntropyBound]) -> bool {
    bounds.iter().all(|lo| {
        lo.direction != Direction::Lower
            || bounds
                .iter()
                .filter(|up| up.direction == Direction::Upper && up.target == lo.target)
                .all(|up| lo.value <= up.value)
    })
}

/// `x log x`, zero at zero.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_density(p: f64) {
    assert!((0.0..=1.0).contains(&p), "density {p} outside [0, 1]");
}

/// Permanent-based lower bound on `lambda_d(p)`:
/// `(-p log p - 2(1-p) log(1-p) + p log 2d - p) / 2`.
pub fn lambda_lower(d: u32, p: f64) -> f64 {
    check_density(p);
    0.5 * (-xlogx(p) - 2.0 * xlogx(1.0 - p) + p * (2.0 * d as f64).ln() - p)
}

/// Maximizer of [`lambda_lower`]: `(4d + 1 - sqrt(8d + 1)) / 4d`.
pub fn optimal_density(d: u32) -> f64 {
    assert!(d >= 1);
    let d = d as f64;
    (4.0 * d + 1.0 - (8.0 * d + 1.0).sqrt()) / (4.0 * d)
}

/// Lower bound on `h_d` from the optimal density.
pub fn monomer_dimer_lower(d: u32) -> f64 {
    lambda_lower(d, optimal_density(d))
}

/// Lower bound on the dimer entropy:
/// `((2d-1) log(2d-1) - (2d-2) log 2d) / 2`.
pub fn dimer_lower(d: u32) -> f64 {
    assert!(d >= 1);
    let two_d = 2.0 * d as f64;
    0.5 * (xlogx(two_d - 1.0) - (two_d - 2.0) * two_d.ln())
}

/// Logarithm of the per-pair perfect matching bound `(r-1)^(r-1) / r^(r-2)`
/// for `r`-regular bipartite graphs.
pub fn schrijver_log_factor(r: u32) -> f64 {
    assert!(r >= 1);
    let r = r as f64;
    xlogx(r - 1.0) - (r - 2.0) * r.ln()
}

/// `binom(n, s)^2 s! (r/n)^s`, a lower bound on the number of `s`-matchings of
/// an `r`-regular bipartite graph with `n + n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingLowerBound {
    pub exact: BigRational,
    pub value: f64,
}

pub fn permanent_matching_lower(n: u64, r: u64, s: u64) -> MatchingLowerBound {
    assert!(s <= n && n >= 1, "need 0 <= s <= n and n >= 1");
    let mut binom = BigUint::one();
    for i in 0..s {
        binom = binom * (n - i) / (i + 1);
    }
    let factorial: BigUint = (1..=s).fold(BigUint::one(), |acc, i| acc * i);
    let numerator = &binom * &binom * factorial * BigUint::from(r).pow(s as u32);
    let denominator = BigUint::from(n).pow(s as u32);
    let exact = BigRational::new(numerator.into(), denominator.into());
    let value = exact.to_f64().unwrap_or(f64::INFINITY);
    MatchingLowerBound { exact, value }
}

/// Exact one-dimensional counts: tilings of `<m>`, periodic covers of `T(m)`,
/// and covers of `<m>` with protrusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneDimCounts {
    pub tilings: u128,
    pub periodic: u128,
    pub protruding: u128,
}

fn fibonacci(k: u32) -> u128 {
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..k {
        (a, b) = (b, a + b);
    }
    a
}

/// `(F_{m+1}, L_m, L_m + 2 F_m)` with `L_m = F_{m+1} + F_{m-1}`.
pub fn one_dim_counts(m: u32) -> OneDimCounts {
    assert!((1..=180).contains(&m), "m out of range");
    let lucas = fibonacci(m + 1) + fibonacci(m - 1);
    OneDimCounts { tilings: fibonacci(m + 1), periodic: lucas, protruding: lucas + 2 * fibonacci(m) }
}

/// Exact entropy of one-dimensional covers at dimer density `p`.
pub fn lambda1(p: f64) -> f64 {
    check_density(p);
    xlogx(1.0 - p / 2.0) - xlogx(p / 2.0) - xlogx(1.0 - p)
}

/// `(p, value)` rows on `[0, 1]` in steps of `step`, the last row at `p = 1`.
/// Dimension 1 uses the exact `lambda1`; higher dimensions the lower bound.
pub fn lambda_curve(d: u32, step: f64) -> Vec<(f64, f64)> {
    assert!(step > 0.0 && step <= 1.0);
    let count = (1.0 / step).round() as usize;
    let exact = (count as f64 * step - 1.0).abs() < 1e-9;
    (0..=count)
        .map(|i| {
            // i / count avoids accumulated error when the step divides 1
            let p = if i == count {
                1.0
            } else if exact {
                i as f64 / count as f64
            } else {
                i as f64 * step
            };
            let value = if d == 1 { lambda1(p) } else { lambda_lower(d, p) };
            (p, value)
        })
        .collect()
}

/// Location and value of the curve's maximum.
pub fn lambda_peak(d: u32) -> (f64, f64) {
    if d == 1 {
        let p = 1.0 - 1.0 / 5f64.sqrt();
        (p, lambda1(p))
    } else {
        let p = optimal_density(d);
        (p, lambda_lower(d, p))
    }
}
