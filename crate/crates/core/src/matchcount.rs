//! Exact monomer-dimer cover counts for every subset of a cross-section.
//!
//! For a vertex subset `U` the count obeys
//!
//! ```text
//! count(U) = [monomers allowed] * count(U - v)
//!          + slots(v) * count(U - v)
//!          + sum_{w in U, w ~ v} mult(v, w) * count(U - v - w)
//! ```
//!
//! with `v` the lowest point of `U` and `count(empty) = 1`. The table holds all
//! `2^n` values, filled in increasing mask order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{protrusion_slots, Adjacency, AdjacencyMode, LatticeShape, SubsetMask};

/// Largest cross-section for which a full count table is built.
pub const MAX_TABLE_POINTS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("exact count overflowed 64 bits")]
    Overflow,
    #[error("shape {shape} has {points} points; count tables are limited to {max}")]
    Capacity { shape: String, points: usize, max: usize },
}

/// The four boundary treatments of a cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// Box adjacency, no protrusion.
    A,
    /// Torus adjacency.
    B,
    /// Wrap along the first axis, protrude along the others.
    P,
    /// Box adjacency, protrusion along every axis.
    C,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::A, Kind::B, Kind::P, Kind::C];

    pub fn adjacency_mode(self) -> AdjacencyMode {
        match self {
            Kind::A | Kind::C => AdjacencyMode::Box,
            Kind::B => AdjacencyMode::Torus,
            Kind::P => AdjacencyMode::MixedWrapFirst,
        }
    }

    /// Adjacency and per-point protrusion slots for this kind on `shape`.
    pub fn configuration(self, shape: &LatticeShape) -> (Adjacency, Vec<u32>) {
        let adjacency = Adjacency::build(shape, self.adjacency_mode());
        let slots = match self {
            Kind::A | Kind::B => vec![0; shape.points()],
            Kind::P => adjacency.slots().to_vec(),
            Kind::C => {
                let all: Vec<usize> = (0..shape.ndim()).collect();
                protrusion_slots(shape, &all).expect("axes in range")
            }
        };
        (adjacency, slots)
    }
}

/// Cover counts of every subset `U` of a cross-section under one configuration.
#[derive(Debug, Clone)]
pub struct MatchingTable {
    shape: LatticeShape,
    kind: Option<Kind>,
    dimer_only: bool,
    slots: Vec<u32>,
    counts: Vec<u64>,
}

impl MatchingTable {
    /// Table for matrix kind `kind`; `dimer_only` forbids monomers.
    pub fn for_kind(shape: &LatticeShape, kind: Kind, dimer_only: bool) -> Result<Self, CountError> {
        let (adjacency, slots) = kind.configuration(shape);
        let mut table = Self::build(&adjacency, &slots, dimer_only)?;
        table.kind = Some(kind);
        Ok(table)
    }

    /// Table for an arbitrary adjacency and slot assignment on the same shape.
    pub fn build(adjacency: &Adjacency, slots: &[u32], dimer_only: bool) -> Result<Self, CountError> {
        let shape = adjacency.shape().clone();
        let n = shape.points();
        if n > MAX_TABLE_POINTS {
            return Err(CountError::Capacity { shape: shape.to_string(), points: n, max: MAX_TABLE_POINTS });
        }
        assert_eq!(slots.len(), n, "one slot count per point");

        let neighbors = adjacency.neighbor_lists();
        // per point: neighbors with a higher index, as bit masks
        let upper: Vec<Vec<(u64, u64)>> = neighbors
            .iter()
            .enumerate()
            .map(|(v, list)| {
                list.iter().filter(|&&(w, _)| w > v).map(|&(w, mult)| (1u64 << w, u64::from(mult))).collect()
            })
            .collect();
        let single: Vec<u64> = slots.iter().map(|&s| u64::from(s) + u64::from(!dimer_only)).collect();

        let size = 1usize << n;
        let mut counts = vec![0u64; size];
        counts[0] = 1;
        for u in 1..size as u64 {
            let v = u.trailing_zeros() as usize;
            let rest = u & (u - 1);
            let mut total = single[v].checked_mul(counts[rest as usize]).ok_or(CountError::Overflow)?;
            for &(w, mult) in &upper[v] {
                if rest & w != 0 {
                    let term = mult.checked_mul(counts[(rest & !w) as usize]).ok_or(CountError::Overflow)?;
                    total = total.checked_add(term).ok_or(CountError::Overflow)?;
                }
            }
            counts[u as usize] = total;
        }
        Ok(Self { shape, kind: None, dimer_only, slots: slots.to_vec(), counts })
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    pub fn kind(&self) -> Option<Kind> {
        self.kind
    }

    pub fn dimer_only(&self) -> bool {
        self.dimer_only
    }

    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    /// Number of covers of `u`.
    #[inline]
    pub fn count(&self, u: SubsetMask) -> u64 {
        self.counts[u.0 as usize]
    }

    #[inline]
    pub(crate) fn count_raw(&self, u: u64) -> u64 {
        self.counts[u as usize]
    }

    /// Transfer matrix entry: zero unless `s` and `t` are disjoint, otherwise
    /// the count of the points in neither.
    #[inline]
    pub fn entry(&self, s: SubsetMask, t: SubsetMask) -> u64 {
        if !s.is_disjoint(t) {
            return 0;
        }
        self.count(s.union(t).complement_in(self.shape.full_mask()))
    }
}

/// Count of covers of `u` under `kind` on `shape`. Builds the whole table; use
/// [`MatchingTable`] directly when more than one count is needed.
pub fn count_covers(shape: &LatticeShape, kind: Kind, dimer_only: bool, u: SubsetMask) -> Result<u64, CountError> {
    Ok(MatchingTable::for_kind(shape, kind, dimer_only)?.count(u))
}

/// Matrix entry `K(shape)_{ST}` for `kind`, monomer-dimer or dimer-only.
pub fn matrix_entry(
    s: SubsetMask,
    t: SubsetMask,
    kind: Kind,
    dimer_only: bool,
    shape: &LatticeShape,
) -> Result<u64, CountError> {
    Ok(MatchingTable::for_kind(shape, kind, dimer_only)?.entry(s, t))
}
