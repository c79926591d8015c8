//! Cross-section geometry: the box `<m'>` and torus `T(m')`.
//!
//! Points are indexed with the first coordinate varying fastest, so the point
//! with 1-based coordinates `(i_1, ..., i_k)` has index
//! `sum_k (i_k - 1) * prod_{j<k} m_j`. A subset of points is a [`SubsetMask`]
//! with bit `i` set when point `i` belongs to it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of points a shape may have; masks are one `u64`.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("shape must have at least one dimension")]
    Empty,
    #[error("dimension {axis} has length 0")]
    ZeroLength { axis: usize },
    #[error("shape has {points} points, more than the supported {max}")]
    TooManyPoints { points: u128, max: usize },
    #[error("coordinate {value} on axis {axis} outside 1..={len}")]
    OutOfRange { axis: usize, value: usize, len: usize },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("axis {axis} does not exist in a {dims}-dimensional shape")]
    NoSuchAxis { axis: usize, dims: usize },
}

/// Dimensions `(m_1, ..., m_k)` of a box or torus cross-section.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LatticeShape {
    dims: Vec<usize>,
    n: usize,
}

impl LatticeShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self, LatticeError> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(LatticeError::Empty);
        }
        let mut n: u128 = 1;
        for (axis, &m) in dims.iter().enumerate() {
            if m == 0 {
                return Err(LatticeError::ZeroLength { axis });
            }
            n = n.saturating_mul(m as u128);
        }
        if n > MAX_POINTS as u128 {
            return Err(LatticeError::TooManyPoints { points: n, max: MAX_POINTS });
        }
        Ok(Self { dims, n: n as usize })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Number of points `|m'|_pr`.
    pub fn points(&self) -> usize {
        self.n
    }

    /// Mask with every point set.
    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }

    /// Distance between consecutive points along `axis` in index space.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[..axis].iter().product()
    }

    /// Index of the point with 1-based coordinates `coords`.
    pub fn point_index(&self, coords: &[usize]) -> Result<usize, LatticeError> {
        if coords.len() != self.dims.len() {
            return Err(LatticeError::Arity { expected: self.dims.len(), got: coords.len() });
        }
        let mut index = 0;
        let mut stride = 1;
        for (axis, (&c, &m)) in coords.iter().zip(&self.dims).enumerate() {
            if c < 1 || c > m {
                return Err(LatticeError::OutOfRange { axis, value: c, len: m });
            }
            index += (c - 1) * stride;
            stride *= m;
        }
        Ok(index)
    }

    /// 1-based coordinates of point `index`. Panics if `index >= points()`.
    pub fn point_coords(&self, index: usize) -> Vec<usize> {
        assert!(index < self.n, "point {index} outside shape with {} points", self.n);
        let mut rest = index;
        self.dims
            .iter()
            .map(|&m| {
                let c = rest % m;
                rest /= m;
                c + 1
            })
            .collect()
    }

    /// Neighbor of `index` one step along `axis`, `forward` or backward, with
    /// wraparound. Returns `None` when the step leaves the box and `wrap` is off.
    pub fn step(&self, index: usize, axis: usize, forward: bool, wrap: bool) -> Option<usize> {
        let m = self.dims[axis];
        let stride = self.stride(axis);
        let c = (index / stride) % m;
        let target = match (forward, c) {
            (true, c) if c + 1 < m => c + 1,
            (true, _) if wrap => 0,
            (false, c) if c > 0 => c - 1,
            (false, _) if wrap => m - 1,
            _ => return None,
        };
        Some(index - c * stride + target * stride)
    }
}

impl TryFrom<Vec<usize>> for LatticeShape {
    type Error = LatticeError;

    fn try_from(dims: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(dims)
    }
}

impl From<LatticeShape> for Vec<usize> {
    fn from(shape: LatticeShape) -> Self {
        shape.dims
    }
}

impl fmt::Display for LatticeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A subset of the points of a shape, one bit per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SubsetMask(u64::MAX)
        } else {
            SubsetMask((1u64 << n) - 1)
        }
    }

    pub fn singleton(point: usize) -> Self {
        SubsetMask(1u64 << point)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, point: usize) -> bool {
        self.0 >> point & 1 == 1
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_disjoint(self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 | other.0)
    }

    /// Points of `within` not in `self`.
    pub fn complement_in(self, within: SubsetMask) -> SubsetMask {
        SubsetMask(within.0 & !self.0)
    }

    pub fn points(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            }
        })
    }
}

impl FromIterator<usize> for SubsetMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SubsetMask(iter.into_iter().fold(0, |acc, p| acc | 1u64 << p))
    }
}

/// Iterates every submask of `mask`, including `mask` itself and the empty set,
/// in decreasing numeric order.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 { None } else { Some((current - 1) & mask) };
        Some(current)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdjacencyMode {
    /// Neighbors inside `<m'>` only.
    Box,
    /// Neighbors on `T(m')`.
    Torus,
    /// Torus rule along the first axis, box rule plus protrusion slots along the others.
    MixedWrapFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u32,
}

/// Undirected multigraph on the points of a shape plus per-point protrusion slots.
#[derive(Debug, Clone)]
pub struct Adjacency {
    shape: LatticeShape,
    mode: AdjacencyMode,
    edges: Vec<Edge>,
    slots: Vec<u32>,
}

impl Adjacency {
    pub fn build(shape: &LatticeShape, mode: AdjacencyMode) -> Self {
        let mut edges = Vec::new();
        for axis in 0..shape.ndim() {
            let wrap = match mode {
                AdjacencyMode::Box => false,
                AdjacencyMode::Torus => true,
                AdjacencyMode::MixedWrapFirst => axis == 0,
            };
            axis_edges(shape, axis, wrap, &mut edges);
        }
        let slots = match mode {
            AdjacencyMode::MixedWrapFirst => {
                let rest: Vec<usize> = (1..shape.ndim()).collect();
                protrusion_slots(shape, &rest).expect("axes in range")
            }
            _ => vec![0; shape.points()],
        };
        Self { shape: shape.clone(), mode, edges, slots }
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    /// Sum of edge multiplicities incident to `point`.
    pub fn degree(&self, point: usize) -> u32 {
        self.edges.iter().filter(|e| e.a == point || e.b == point).map(|e| e.multiplicity).sum()
    }

    /// For every point, its neighbors and the multiplicity of the joining edge.
    pub fn neighbor_lists(&self) -> Vec<Vec<(usize, u32)>> {
        let mut lists = vec![Vec::new(); self.shape.points()];
        for e in &self.edges {
            lists[e.a].push((e.b, e.multiplicity));
            lists[e.b].push((e.a, e.multiplicity));
        }
        lists
    }
}

fn axis_edges(shape: &LatticeShape, axis: usize, wrap: bool, edges: &mut Vec<Edge>) {
    let m = shape.dims()[axis];
    let stride = shape.stride(axis);
    for a in 0..shape.points() {
        let c = (a / stride) % m;
        if c + 1 < m {
            // a length-2 torus axis has both of its edges on the same pair
            let multiplicity = if wrap && m == 2 { 2 } else { 1 };
            edges.push(Edge { a, b: a + stride, multiplicity });
        } else if wrap && m >= 3 {
            edges.push(Edge { a: a - c * stride, b: a, multiplicity: 1 });
        }
    }
}

/// Outward dimer slots per point along the given (0-based) axes: one for each
/// end of the axis the point sits on, so two when that axis has length 1.
pub fn protrusion_slots(shape: &LatticeShape, axes: &[usize]) -> Result<Vec<u32>, LatticeError> {
    for &axis in axes {
        if axis >= shape.ndim() {
            return Err(LatticeError::NoSuchAxis { axis, dims: shape.ndim() });
        }
    }
    Ok((0..shape.points())
        .map(|p| {
            let coords = shape.point_coords(p);
            axes.iter().map(|&k| u32::from(coords[k] == 1) + u32::from(coords[k] == shape.dims()[k])).sum()
        })
        .collect())
}
