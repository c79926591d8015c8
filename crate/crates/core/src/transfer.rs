//! Transfer matrices indexed by cross-section subsets, and their reduction to
//! orbit space.
//!
//! The quotient matrix has entries `q[a][b] = sum_{j in orbit b} K(i, j)` for
//! any representative `i` of orbit `a`. It is self-adjoint under the inner
//! product weighted by orbit sizes, and shares the spectral radius of `K`.

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{submasks, LatticeShape, SubsetMask};
use crate::matchcount::{CountError, Kind, MatchingTable};
use crate::symmetry::{MotionGroup, OrbitSpace, SymmetryError};

/// Largest cross-section for the exact unreduced trace and quadratic forms.
pub const MAX_FULL_POINTS: usize = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransferError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("exact accumulation overflowed")]
    Overflow,
    #[error("unreduced computation on {points} points exceeds the limit of {max}")]
    Capacity { points: usize, max: usize },
    #[error("orbit space covers {orbits} points but the table has {table}")]
    Mismatch { orbits: usize, table: usize },
}

/// Sparse nonnegative integer matrix on orbit space with orbit weights.
#[derive(Debug, Clone)]
pub struct QuotientMatrix {
    shape: LatticeShape,
    kind: Option<Kind>,
    dimer_only: bool,
    weights: Vec<u64>,
    reps: Vec<u64>,
    rows: Vec<Vec<(u32, u64)>>,
}

impl QuotientMatrix {
    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    pub fn kind(&self) -> Option<Kind> {
        self.kind
    }

    pub fn dimer_only(&self) -> bool {
        self.dimer_only
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn reps(&self) -> &[u64] {
        &self.reps
    }

    /// Nonzero entries of row `a` as `(column, value)`, columns increasing.
    pub fn row(&self, a: usize) -> &[(u32, u64)] {
        &self.rows[a]
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, a: usize, b: usize) -> u64 {
        let row = &self.rows[a];
        row.binary_search_by_key(&(b as u32), |&(c, _)| c).map(|i| row[i].1).unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        let m = self.order();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0; m];
                for &(c, v) in row {
                    dense[c as usize] = v;
                }
                dense
            })
            .collect()
    }

    /// `w_a q[a][b] == w_b q[b][a]` for every pair, in exact arithmetic.
    pub fn is_weighted_symmetric(&self) -> bool {
        self.rows.iter().enumerate().all(|(a, row)| {
            row.iter().all(|&(b, v)| {
                let lhs = u128::from(self.weights[a]) * u128::from(v);
                let rhs = u128::from(self.weights[b as usize]) * u128::from(self.entry(b as usize, a));
                lhs == rhs
            })
        })
    }

    /// Row sums, exact.
    pub fn row_sums(&self) -> Vec<u128> {
        self.rows.iter().map(|row| row.iter().map(|&(_, v)| u128::from(v)).sum()).collect()
    }
}

/// Quotient of the transfer matrix described by `table` under `orbits`.
///
/// For each representative `i`, every subset `j` disjoint from `i` is visited
/// once and `K(i, j)` is added to the column of `j`'s orbit.
pub fn build_quotient(table: &MatchingTable, orbits: &OrbitSpace) -> Result<QuotientMatrix, TransferError> {
    let n = table.shape().points();
    if orbits.points() != n {
        return Err(TransferError::Mismatch { orbits: orbits.points(), table: n });
    }
    let full = table.shape().full_mask().0;
    let m = orbits.len();
    let rows: Result<Vec<Vec<(u32, u64)>>, TransferError> = orbits
        .reps()
        .par_iter()
        .map_init(
            || vec![0u64; m],
            |acc, &rep| {
                let free = full & !rep;
                for j in submasks(free) {
                    let value = table.count_raw(free & !j);
                    if value != 0 {
                        let slot = &mut acc[orbits.orbit_of_raw(j) as usize];
                        *slot = slot.checked_add(value).ok_or(TransferError::Overflow)?;
                    }
                }
                let mut row = Vec::new();
                for (b, slot) in acc.iter_mut().enumerate() {
                    if *slot != 0 {
                        row.push((b as u32, *slot));
                        *slot = 0;
                    }
                }
                Ok(row)
            },
        )
        .collect();
    Ok(QuotientMatrix {
        shape: table.shape().clone(),
        kind: table.kind(),
        dimer_only: table.dimer_only(),
        weights: orbits.sizes().to_vec(),
        reps: orbits.reps().to_vec(),
        rows: rows?,
    })
}

/// Quotient under the rigid motions of the torus that are symmetries of
/// `kind` (all of them for `B`, the box motions for `A` and `C`).
pub fn rigid_quotient(shape: &LatticeShape, kind: Kind, dimer_only: bool) -> Result<QuotientMatrix, TransferError> {
    let table = MatchingTable::for_kind(shape, kind, dimer_only)?;
    let mut group = MotionGroup::rigid_motions(shape);
    if kind != Kind::B {
        let (adjacency, slots) = kind.configuration(shape);
        group = group.stabilizer(&adjacency, &slots);
    }
    let orbits = OrbitSpace::compute(&group, shape.points())?;
    build_quotient(&table, &orbits)
}

/// The unreduced `2^n x 2^n` matrix, assembled entry by entry with unit weights.
pub fn full_matrix(table: &MatchingTable) -> Result<QuotientMatrix, TransferError> {
    let n = table.shape().points();
    if n > MAX_FULL_POINTS {
        return Err(TransferError::Capacity { points: n, max: MAX_FULL_POINTS });
    }
    let size = 1u64 << n;
    let rows = (0..size)
        .map(|s| {
            (0..size)
                .filter_map(|t| {
                    let v = table.entry(SubsetMask(s), SubsetMask(t));
                    (v != 0).then_some((t as u32, v))
                })
                .collect()
        })
        .collect();
    Ok(QuotientMatrix {
        shape: table.shape().clone(),
        kind: table.kind(),
        dimer_only: table.dimer_only(),
        weights: vec![1; size as usize],
        reps: (0..size).collect(),
        rows,
    })
}

/// `y = K x` on the unreduced matrix, exact, without materializing `K`.
fn full_apply(table: &MatchingTable, x: &[u128]) -> Result<Vec<u128>, TransferError> {
    let full = table.shape().full_mask().0;
    (0..x.len() as u64)
        .map(|s| {
            let free = full & !s;
            submasks(free).try_fold(0u128, |acc, t| {
                let term =
                    u128::from(table.count_raw(free & !t)).checked_mul(x[t as usize]).ok_or(TransferError::Overflow)?;
                acc.checked_add(term).ok_or(TransferError::Overflow)
            })
        })
        .collect()
}

fn check_full_capacity(shape: &LatticeShape) -> Result<(), TransferError> {
    if shape.points() > MAX_FULL_POINTS {
        return Err(TransferError::Capacity { points: shape.points(), max: MAX_FULL_POINTS });
    }
    Ok(())
}

/// Exact `tr K^q` of the unreduced matrix; `tr K^0 = 2^n`.
pub fn full_trace_power(
    shape: &LatticeShape,
    kind: Kind,
    dimer_only: bool,
    exponent: u32,
) -> Result<u128, TransferError> {
    check_full_capacity(shape)?;
    let size = 1usize << shape.points();
    if exponent == 0 {
        return Ok(size as u128);
    }
    let table = MatchingTable::for_kind(shape, kind, dimer_only)?;
    // tr K^q = sum_S (K^q e_S)_S, one basis vector at a time
    let diagonal: Result<Vec<u128>, TransferError> = (0..size)
        .into_par_iter()
        .map(|s| {
            let mut v = vec![0u128; size];
            v[s] = 1;
            for _ in 0..exponent {
                v = full_apply(&table, &v)?;
            }
            Ok(v[s])
        })
        .collect();
    diagonal?.into_iter().try_fold(0u128, |acc, d| acc.checked_add(d).ok_or(TransferError::Overflow))
}

/// Exact `x^T K^(levels - 2) x` with `x_S = K_{S, empty}`, for `levels >= 2`.
pub fn quadratic_form_count(
    shape: &LatticeShape,
    kind: Kind,
    dimer_only: bool,
    levels: u32,
) -> Result<u128, TransferError> {
    assert!(levels >= 2, "quadratic form needs at least two levels");
    check_full_capacity(shape)?;
    let table = MatchingTable::for_kind(shape, kind, dimer_only)?;
    let size = 1u64 << shape.points();
    let x: Vec<u128> = (0..size).map(|s| u128::from(table.entry(SubsetMask(s), SubsetMask::EMPTY))).collect();
    let mut v = x.clone();
    for _ in 0..levels - 2 {
        v = full_apply(&table, &v)?;
    }
    dot(&x, &v)
}

/// Exact `1^T K^levels 1`: every level's free points may use any vertical slot.
pub fn walk_sum_count(shape: &LatticeShape, kind: Kind, dimer_only: bool, levels: u32) -> Result<u128, TransferError> {
    check_full_capacity(shape)?;
    let table = MatchingTable::for_kind(shape, kind, dimer_only)?;
    let ones = vec![1u128; 1usize << shape.points()];
    let mut v = ones.clone();
    for _ in 0..levels {
        v = full_apply(&table, &v)?;
    }
    dot(&ones, &v)
}

fn dot(a: &[u128], b: &[u128]) -> Result<u128, TransferError> {
    a.iter().zip(b).try_fold(0u128, |acc, (&p, &q)| {
        p.checked_mul(q).and_then(|t| acc.checked_add(t)).ok_or(TransferError::Overflow)
    })
}
