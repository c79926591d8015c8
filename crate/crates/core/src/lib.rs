//! Monomer-dimer and dimer entropy bounds on hypercubic lattices, computed
//! from symmetry-reduced transfer matrices.
//!
//! The pipeline runs from [`lattice`] (shapes, subsets, adjacency) through
//! [`matchcount`] (cover counts of subsets), [`symmetry`] (rigid motions and
//! subset orbits) and [`transfer`] (quotient matrices) to [`spectral`]
//! (certified spectral-radius brackets) and [`bounds`] (entropy bounds and
//! closed forms). [`oracle`] cross-checks everything by brute force.

pub mod bounds;
pub mod cli;
pub mod lattice;
pub mod matchcount;
pub mod oracle;
pub mod record;
pub mod spectral;
pub mod symmetry;
pub mod transfer;

pub use bounds::{BetaSolver, BoundsError, EntropyBound, LogBeta, Target};
pub use lattice::{LatticeShape, SubsetMask};
pub use matchcount::{Kind, MatchingTable};
pub use spectral::{PowerOptions, SpectralBracket};
pub use transfer::QuotientMatrix;
