//! Brute-force enumeration of monomer-dimer covers of small boxes and tori.
//!
//! The enumerator works from coordinates alone and shares no code with the
//! transfer-matrix path, so the identities it checks are independent
//! cross-validations. It backtracks over the lowest uncovered point; a point
//! may become a monomer, half of a dimer to an uncovered neighbor, or half of a
//! dimer protruding through a boundary face. Periodic axes of length 2 give two
//! distinct wrap dimers between the same pair, periodic axes of length 1 none.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::one_dim_counts;
use crate::lattice::{LatticeShape, SubsetMask};
use crate::matchcount::{Kind, MatchingTable};
use crate::transfer::{full_trace_power, quadratic_form_count, walk_sum_count, TransferError};

/// Largest box the enumerator accepts.
pub const MAX_ORACLE_POINTS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{points} points exceed the enumeration limit of {max}")]
    Capacity { points: usize, max: usize },
    #[error("need one boundary per axis: {dims} axes, {boundaries} boundaries")]
    Arity { dims: usize, boundaries: usize },
    #[error("axis lengths must be positive")]
    ZeroLength,
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// Treatment of the two faces of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Boundary {
    /// Dimers stay inside the box.
    Tiling,
    /// Opposite faces are glued.
    Periodic,
    /// Dimers may stick out through either face.
    Protruding,
}

/// Totals of an enumeration, broken down by number of monomers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverCensus {
    pub dims: Vec<usize>,
    pub boundaries: Vec<Boundary>,
    /// `by_monomers[k]` covers use exactly `k` monomers.
    pub by_monomers: Vec<u128>,
}

impl CoverCensus {
    pub fn points(&self) -> usize {
        self.dims.iter().product()
    }

    /// Monomer-dimer covers.
    pub fn total(&self) -> u128 {
        self.by_monomers.iter().sum()
    }

    /// Dimer covers.
    pub fn dimer_only(&self) -> u128 {
        self.by_monomers[0]
    }

    pub fn count(&self, dimer_only: bool) -> u128 {
        if dimer_only {
            self.dimer_only()
        } else {
            self.total()
        }
    }

    /// Covers with exactly `s` dimers; `None` when dimers may protrude, since
    /// the monomer count then does not determine the dimer count.
    pub fn with_dimers(&self, s: usize) -> Option<u128> {
        if self.boundaries.contains(&Boundary::Protruding) {
            return None;
        }
        let monomers = self.points().checked_sub(2 * s)?;
        Some(self.by_monomers.get(monomers).copied().unwrap_or(0))
    }
}

struct Enumerator {
    n: usize,
    /// per point: inner neighbors (with repetition for double wrap edges)
    partners: Vec<Vec<usize>>,
    /// per point: number of protrusion options
    outward: Vec<u128>,
    by_monomers: Vec<u128>,
}

impl Enumerator {
    fn new(dims: &[usize], boundaries: &[Boundary]) -> Self {
        let n: usize = dims.iter().product();
        let mut partners = vec![Vec::new(); n];
        let mut outward = vec![0u128; n];
        for point in 0..n {
            let coords = decompose(point, dims);
            for (axis, &m) in dims.iter().enumerate() {
                for delta in [1isize, -1] {
                    let c = coords[axis] as isize + delta;
                    let inside = (0..m as isize).contains(&c);
                    let target = match (inside, boundaries[axis]) {
                        (true, _) => Some(c as usize),
                        (false, Boundary::Periodic) => Some(c.rem_euclid(m as isize) as usize),
                        (false, Boundary::Protruding) => {
                            outward[point] += 1;
                            None
                        }
                        (false, Boundary::Tiling) => None,
                    };
                    if let Some(t) = target {
                        let mut moved = coords.clone();
                        moved[axis] = t;
                        let other = compose(&moved, dims);
                        if other != point {
                            partners[point].push(other);
                        }
                    }
                }
            }
        }
        Self { n, partners, outward, by_monomers: vec![0; n + 1] }
    }

    fn run(&mut self, covered: u64, monomers: usize, weight: u128) {
        let free = !covered & mask_of(self.n);
        if free == 0 {
            self.by_monomers[monomers] += weight;
            return;
        }
        let v = free.trailing_zeros() as usize;
        let covered = covered | 1 << v;
        self.run(covered, monomers + 1, weight);
        if self.outward[v] > 0 {
            self.run(covered, monomers, weight * self.outward[v]);
        }
        for i in 0..self.partners[v].len() {
            let w = self.partners[v][i];
            if covered >> w & 1 == 0 {
                self.run(covered | 1 << w, monomers, weight);
            }
        }
    }
}

fn mask_of(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn decompose(mut point: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&m| {
            let c = point % m;
            point /= m;
            c
        })
        .collect()
}

fn compose(coords: &[usize], dims: &[usize]) -> usize {
    coords.iter().zip(dims).rev().fold(0, |acc, (&c, &m)| acc * m + c)
}

fn validate(dims: &[usize], boundaries: &[Boundary]) -> Result<usize, OracleError> {
    if dims.len() != boundaries.len() {
        return Err(OracleError::Arity { dims: dims.len(), boundaries: boundaries.len() });
    }
    if dims.contains(&0) {
        return Err(OracleError::ZeroLength);
    }
    let n = dims.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m)).unwrap_or(usize::MAX);
    if n > MAX_ORACLE_POINTS {
        return Err(OracleError::Capacity { points: n, max: MAX_ORACLE_POINTS });
    }
    Ok(n)
}

/// Enumerates every cover of the box `dims` with the given per-axis boundaries.
pub fn enumerate_covers(dims: &[usize], boundaries: &[Boundary]) -> Result<CoverCensus, OracleError> {
    validate(dims, boundaries)?;
    let mut e = Enumerator::new(dims, boundaries);
    e.run(0, 0, 1);
    Ok(CoverCensus { dims: dims.to_vec(), boundaries: boundaries.to_vec(), by_monomers: e.by_monomers })
}

/// Covers of the subset `u` of the box, with dimers confined to `u` except for
/// protrusions through boundary faces.
pub fn enumerate_subset(
    dims: &[usize],
    boundaries: &[Boundary],
    u: SubsetMask,
    dimer_only: bool,
) -> Result<u128, OracleError> {
    let n = validate(dims, boundaries)?;
    let mut e = Enumerator::new(dims, boundaries);
    e.run(!u.0 & mask_of(n), 0, 1);
    Ok(if dimer_only { e.by_monomers[0] } else { e.by_monomers.iter().sum() })
}

/// Per-axis boundaries that realize a transfer-matrix kind on a cross-section.
pub fn kind_boundaries(kind: Kind, axes: usize) -> Vec<Boundary> {
    (0..axes)
        .map(|axis| match kind {
            Kind::A => Boundary::Tiling,
            Kind::B => Boundary::Periodic,
            Kind::P if axis == 0 => Boundary::Periodic,
            Kind::P | Kind::C => Boundary::Protruding,
        })
        .collect()
}

/// Outcome of one identity or inequality check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn equal(name: String, transfer: u128, oracle: u128) -> Self {
        Self { name, passed: transfer == oracle, detail: format!("{transfer} vs {oracle}") }
    }

    fn holds(name: String, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

fn with_level(cross: &[usize], levels: usize) -> Vec<usize> {
    let mut dims = cross.to_vec();
    dims.push(levels);
    dims
}

fn with_last(mut boundaries: Vec<Boundary>, last: Boundary) -> Vec<Boundary> {
    boundaries.push(last);
    boundaries
}

/// Checks the trace identities `tr K^levels` against periodic stacking of
/// `levels` copies of the cross-section for all four kinds, and for
/// `levels >= 2` the quadratic forms `x^T K^(levels-2) x` (with `x_S = K_{S,empty}`)
/// against covers that do not protrude along the stacking axis, plus
/// `1^T C^levels 1` against covers protruding along every axis.
pub fn verify_transfer_identities(cross: &LatticeShape, levels: usize) -> Result<Vec<CheckResult>, OracleError> {
    transfer_identity_checks(cross, levels, false)
}

fn transfer_identity_checks(
    cross: &LatticeShape,
    levels: usize,
    mutate: bool,
) -> Result<Vec<CheckResult>, OracleError> {
    let dims = with_level(cross.dims(), levels);
    validate(&dims, &vec![Boundary::Tiling; dims.len()])?;
    let axes = cross.ndim();
    let mut checks = Vec::new();
    for dimer_only in [false, true] {
        let tag = if dimer_only { "dimer" } else { "monomer-dimer" };
        for kind in Kind::ALL {
            let trace = full_trace_power(cross, kind, dimer_only, levels as u32)?;
            // the negative control pairs each trace with the next kind's boundaries
            let paired = if mutate { Kind::ALL[(kind as usize + 1) % 4] } else { kind };
            let bounds = with_last(kind_boundaries(paired, axes), Boundary::Periodic);
            let census = enumerate_covers(&dims, &bounds)?;
            checks.push(CheckResult::equal(
                format!("tr {kind:?}{cross}^{levels} {tag}"),
                trace,
                census.count(dimer_only),
            ));
        }
        if levels >= 2 {
            for kind in [Kind::B, Kind::P, Kind::C] {
                let form = quadratic_form_count(cross, kind, dimer_only, levels as u32)?;
                let bounds = with_last(kind_boundaries(kind, axes), Boundary::Tiling);
                let census = enumerate_covers(&dims, &bounds)?;
                checks.push(CheckResult::equal(
                    format!("x^T {kind:?}{cross}^{} x {tag}", levels - 2),
                    form,
                    census.count(dimer_only),
                ));
            }
            let walks = walk_sum_count(cross, Kind::C, dimer_only, levels as u32)?;
            let census = enumerate_covers(&dims, &vec![Boundary::Protruding; dims.len()])?;
            checks.push(CheckResult::equal(format!("1^T C{cross}^{levels} 1 {tag}"), walks, census.count(dimer_only)));
        }
    }
    Ok(checks)
}

fn one_dim_checks(max_points: usize, out: &mut Vec<CheckResult>) -> Result<(), OracleError> {
    for m in 1..=15.min(max_points) {
        let closed = one_dim_counts(m as u32);
        let shape = LatticeShape::new(vec![m]).expect("valid shape");
        let expected = [
            (Boundary::Tiling, Kind::A, closed.tilings, "F(m+1)"),
            (Boundary::Periodic, Kind::B, closed.periodic, "L(m)"),
            (Boundary::Protruding, Kind::C, closed.protruding, "L(m)+2F(m)"),
        ];
        for (boundary, kind, formula, label) in expected {
            let census = enumerate_covers(&[m], &[boundary])?;
            let table = MatchingTable::for_kind(&shape, kind, false).map_err(TransferError::from)?;
            let counted = u128::from(table.count(shape.full_mask()));
            out.push(CheckResult::holds(
                format!("1-D {label} m={m}"),
                census.total() == formula && counted == formula,
                format!("oracle {} table {counted} formula {formula}", census.total()),
            ));
        }
    }
    Ok(())
}

const CHAIN_SHAPES: &[&[usize]] = &[
    &[1],
    &[2],
    &[3],
    &[4],
    &[5],
    &[6],
    &[7],
    &[8],
    &[9],
    &[10],
    &[11],
    &[12],
    &[2, 2],
    &[3, 2],
    &[3, 3],
    &[4, 2],
    &[4, 3],
    &[5, 2],
    &[6, 2],
    &[2, 2, 2],
    &[3, 2, 2],
];

fn chain_checks(max_points: usize, out: &mut Vec<CheckResult>) -> Result<(), OracleError> {
    for &dims in CHAIN_SHAPES {
        let n: usize = dims.iter().product();
        if n > max_points.min(12) {
            continue;
        }
        let all = |b| vec![b; dims.len()];
        let tiling = enumerate_covers(dims, &all(Boundary::Tiling))?;
        let periodic = enumerate_covers(dims, &all(Boundary::Periodic))?;
        let protruding = enumerate_covers(dims, &all(Boundary::Protruding))?;
        let (w0, wp, w) = (tiling.total(), periodic.total(), protruding.total());
        let (d0, dp, dw) = (tiling.dimer_only(), periodic.dimer_only(), protruding.dimer_only());
        let name = format!("{dims:?}");
        out.push(CheckResult::holds(
            format!("W0 <= Wper <= W {name}"),
            w0 <= wp && wp <= w,
            format!("{w0} <= {wp} <= {w}"),
        ));
        out.push(CheckResult::holds(
            format!("W~0 <= W~per <= W~ <= W {name}"),
            d0 <= dp && dp <= dw && dw <= w,
            format!("{d0} <= {dp} <= {dw} <= {w}"),
        ));
        out.push(CheckResult::holds(
            format!("W~0 <= W0, W~per <= Wper {name}"),
            d0 <= w0 && dp <= wp,
            format!("{d0} <= {w0}, {dp} <= {wp}"),
        ));
        let grown: Vec<usize> = dims.iter().map(|m| m + 2).collect();
        if grown.iter().product::<usize>() <= max_points {
            let outer = enumerate_covers(&grown, &all(Boundary::Tiling))?;
            out.push(CheckResult::holds(
                format!("W <= W0(m+2) {name}"),
                w <= outer.total(),
                format!("{w} <= {}", outer.total()),
            ));
        }
        let sums = (0..=n / 2).filter_map(|s| tiling.with_dimers(s)).sum::<u128>();
        let all_positive = (0..=n / 2).all(|s| tiling.with_dimers(s).is_some_and(|c| c >= 1));
        out.push(CheckResult::holds(
            format!("W0(m, s) census {name}"),
            sums == w0 && all_positive,
            format!("sum {sums} of {w0}"),
        ));
    }
    Ok(())
}

fn permutation_checks(max_points: usize, out: &mut Vec<CheckResult>) -> Result<(), OracleError> {
    let pairs: &[(&[usize], &[usize])] =
        &[(&[2, 3], &[3, 2]), (&[2, 5], &[5, 2]), (&[3, 4], &[4, 3]), (&[2, 2, 3], &[3, 2, 2])];
    for &(a, b) in pairs {
        if a.iter().product::<usize>() > max_points {
            continue;
        }
        let x = enumerate_covers(a, &vec![Boundary::Periodic; a.len()])?;
        let y = enumerate_covers(b, &vec![Boundary::Periodic; b.len()])?;
        out.push(CheckResult::holds(
            format!("Wper{a:?} = Wper{b:?}"),
            x.by_monomers == y.by_monomers,
            format!("{} vs {}", x.total(), y.total()),
        ));
    }
    Ok(())
}

/// Cross-sections for the random-subset comparison between the count tables
/// and direct enumeration.
const SUBSET_SHAPES: &[&[usize]] = &[&[1], &[2], &[5], &[9], &[2, 2], &[3, 3], &[4, 2], &[2, 2, 2]];

/// Compares table counts with direct enumeration for `samples` random subsets
/// per (shape, kind, dimer_only) configuration. Deterministic for a given seed.
pub fn random_subset_checks(max_points: usize, samples: usize, seed: u64) -> Result<Vec<CheckResult>, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &dims in SUBSET_SHAPES {
        let shape = LatticeShape::new(dims.to_vec()).expect("valid shape");
        if shape.points() > max_points {
            continue;
        }
        let full = shape.full_mask().0;
        for kind in Kind::ALL {
            let boundaries = kind_boundaries(kind, dims.len());
            for dimer_only in [false, true] {
                let table = MatchingTable::for_kind(&shape, kind, dimer_only).map_err(TransferError::from)?;
                let mut mismatches = Vec::new();
                for _ in 0..samples {
                    let u = SubsetMask(rng.gen::<u64>() & full);
                    let brute = enumerate_subset(dims, &boundaries, u, dimer_only)?;
                    let counted = u128::from(table.count(u));
                    if brute != counted {
                        mismatches.push(format!("U={:#b}: {counted} vs {brute}", u.0));
                    }
                }
                out.push(CheckResult::holds(
                    format!("count_covers vs enumeration {dims:?} {kind:?} dimer_only={dimer_only}"),
                    mismatches.is_empty(),
                    if mismatches.is_empty() { format!("{samples} subsets agree") } else { mismatches.join("; ") },
                ));
            }
        }
    }
    Ok(out)
}

/// Cross-sections for the transfer identities.
pub const IDENTITY_SHAPES: &[&[usize]] = &[&[2], &[3], &[4], &[2, 2], &[3, 2]];

/// Report of the full verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub max_points: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn render(&self) -> String {
        let mut text = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            text.push_str(&format!("{status}  {}  [{}]\n", c.name, c.detail));
        }
        let failed = self.failures().count();
        text.push_str(&format!(
            "{} checks, {} passed, {} failed (max points {})\n",
            self.checks.len(),
            self.checks.len() - failed,
            failed,
            self.max_points
        ));
        text
    }
}

/// Runs every oracle check whose boxes have at most `max_points` points.
pub fn run_suite(max_points: usize) -> Result<VerificationReport, OracleError> {
    suite(max_points, false)
}

/// The suite with the transfer identities deliberately mispaired; it must fail.
pub fn run_mutated_suite(max_points: usize) -> Result<VerificationReport, OracleError> {
    suite(max_points, true)
}

fn suite(max_points: usize, mutate: bool) -> Result<VerificationReport, OracleError> {
    let max_points = max_points.min(MAX_ORACLE_POINTS);
    let mut checks = Vec::new();
    one_dim_checks(max_points, &mut checks)?;
    for &cross in IDENTITY_SHAPES {
        let shape = LatticeShape::new(cross.to_vec()).expect("valid shape");
        for levels in 1..=4 {
            if shape.points() * levels <= max_points {
                checks.extend(transfer_identity_checks(&shape, levels, mutate)?);
            }
        }
    }
    chain_checks(max_points, &mut checks)?;
    permutation_checks(max_points, &mut checks)?;
    checks.extend(random_subset_checks(max_points, 100, 0x6d64_6563)?);
    Ok(VerificationReport { max_points, checks })
}
