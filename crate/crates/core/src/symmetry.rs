//! Rigid motions of the torus `T(m')` and the orbits they induce on subsets.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::lattice::{Adjacency, AdjacencyMode, LatticeShape, SubsetMask};

/// Largest point count for which all `2^n` subsets are partitioned into orbits.
pub const MAX_ORBIT_POINTS: usize = 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("orbit enumeration over {points} points exceeds the limit of {max}")]
    Capacity { points: usize, max: usize },
    #[error("group acts on {group} points but {expected} were requested")]
    PointMismatch { group: usize, expected: usize },
}

/// A permutation of lattice points; `images[i]` is where point `i` goes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointPermutation {
    images: Vec<usize>,
}

impl PointPermutation {
    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// Panics unless `images` is a permutation of `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Self {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            assert!(i < images.len() && !seen[i], "not a permutation: {images:?}");
            seen[i] = true;
        }
        Self { images }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `self` after `other`: point `i` goes to `self(other(i))`.
    pub fn compose(&self, other: &PointPermutation) -> PointPermutation {
        PointPermutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> PointPermutation {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        PointPermutation { images }
    }

    pub fn apply(&self, mask: SubsetMask) -> SubsetMask {
        mask.points().map(|p| self.images[p]).collect()
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.images.len()];
        let mut cycles = 0;
        for start in 0..self.images.len() {
            if !seen[start] {
                cycles += 1;
                let mut p = start;
                while !seen[p] {
                    seen[p] = true;
                    p = self.images[p];
                }
            }
        }
        cycles
    }

    /// True when the permutation maps every edge to an edge of equal multiplicity.
    pub fn preserves(&self, adjacency: &Adjacency) -> bool {
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let edges: HashSet<(usize, usize, u32)> = adjacency
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = key(e.a, e.b);
                (a, b, e.multiplicity)
            })
            .collect();
        adjacency.edges().iter().all(|e| {
            let (a, b) = key(self.images[e.a], self.images[e.b]);
            edges.contains(&(a, b, e.multiplicity))
        })
    }
}

/// An explicit list of point permutations closed under composition.
#[derive(Debug, Clone)]
pub struct MotionGroup {
    n: usize,
    elements: Vec<PointPermutation>,
}

impl MotionGroup {
    /// Only the identity.
    pub fn trivial(n: usize) -> Self {
        Self { n, elements: vec![PointPermutation::identity(n)] }
    }

    /// The group generated by unit translations, reflections `x_k -> m_k + 1 - x_k`,
    /// and coordinate transpositions between axes of equal length.
    pub fn rigid_motions(shape: &LatticeShape) -> Self {
        Self::generated_by(shape.points(), &rigid_motion_generators(shape))
    }

    /// Closure of `generators` under composition.
    pub fn generated_by(n: usize, generators: &[PointPermutation]) -> Self {
        let identity = PointPermutation::identity(n);
        let mut seen: HashSet<PointPermutation> = HashSet::new();
        let mut elements = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(identity.clone());
        queue.push_back(identity);
        while let Some(g) = queue.pop_front() {
            for gen in generators {
                let h = gen.compose(&g);
                if seen.insert(h.clone()) {
                    queue.push_back(h);
                }
            }
            elements.push(g);
        }
        Self { n, elements }
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[PointPermutation] {
        &self.elements
    }

    /// Number of orbits on subsets by counting fixed subsets of each element.
    pub fn burnside_orbit_count(&self) -> u128 {
        let total: u128 = self.elements.iter().map(|g| 1u128 << g.cycle_count()).sum();
        total / self.elements.len() as u128
    }

    /// The elements mapping `adjacency` onto itself and each point to one
    /// with the same slot count; a subgroup.
    pub fn stabilizer(&self, adjacency: &Adjacency, slots: &[u32]) -> Self {
        let elements = self
            .elements
            .iter()
            .filter(|g| g.preserves(adjacency) && g.images().iter().enumerate().all(|(i, &j)| slots[i] == slots[j]))
            .cloned()
            .collect();
        Self { n: self.n, elements }
    }

    /// True when every element is an automorphism of the torus graph of `shape`.
    pub fn preserves_torus(&self, shape: &LatticeShape) -> bool {
        let torus = Adjacency::build(shape, AdjacencyMode::Torus);
        self.elements.iter().all(|g| g.preserves(&torus))
    }
}

fn rigid_motion_generators(shape: &LatticeShape) -> Vec<PointPermutation> {
    let n = shape.points();
    let dims = shape.dims();
    let map = |f: &dyn Fn(&mut Vec<usize>)| {
        let images = (0..n)
            .map(|p| {
                let mut c = shape.point_coords(p);
                f(&mut c);
                shape.point_index(&c).expect("motion stays inside the shape")
            })
            .collect();
        PointPermutation::from_images(images)
    };
    let mut gens = Vec::new();
    for k in 0..dims.len() {
        let m = dims[k];
        gens.push(map(&|c| c[k] = c[k] % m + 1));
        gens.push(map(&|c| c[k] = m + 1 - c[k]));
        for (j, &other) in dims.iter().enumerate().skip(k + 1) {
            if other == m {
                gens.push(map(&|c| c.swap(k, j)));
            }
        }
    }
    gens
}

/// Precomputed byte lookup tables for applying one permutation to whole masks.
struct MaskMapper {
    tables: Vec<[u64; 256]>,
}

impl MaskMapper {
    fn new(perm: &PointPermutation) -> Self {
        let chunks = perm.len().div_ceil(8);
        let tables = (0..chunks)
            .map(|c| {
                let mut table = [0u64; 256];
                for (byte, slot) in table.iter_mut().enumerate() {
                    for bit in 0..8 {
                        let p = c * 8 + bit;
                        if byte >> bit & 1 == 1 && p < perm.len() {
                            *slot |= 1u64 << perm.images()[p];
                        }
                    }
                }
                table
            })
            .collect();
        Self { tables }
    }

    #[inline]
    fn apply(&self, mask: u64) -> u64 {
        self.tables.iter().enumerate().fold(0, |acc, (c, t)| acc | t[(mask >> (8 * c) & 0xff) as usize])
    }
}

/// Partition of all subsets of an `n`-point set into group orbits.
#[derive(Debug, Clone)]
pub struct OrbitSpace {
    n: usize,
    reps: Vec<u64>,
    sizes: Vec<u64>,
    orbit_of: Vec<u32>,
}

impl OrbitSpace {
    /// Walks masks in increasing order; each unvisited mask starts a new orbit
    /// and is its (minimal) representative.
    pub fn compute(group: &MotionGroup, n: usize) -> Result<Self, SymmetryError> {
        if group.points() != n {
            return Err(SymmetryError::PointMismatch { group: group.points(), expected: n });
        }
        if n > MAX_ORBIT_POINTS {
            return Err(SymmetryError::Capacity { points: n, max: MAX_ORBIT_POINTS });
        }
        let mappers: Vec<MaskMapper> = group.elements().iter().map(MaskMapper::new).collect();
        let size = 1usize << n;
        let mut orbit_of = vec![u32::MAX; size];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for mask in 0..size as u64 {
            if orbit_of[mask as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            let mut members = 0u64;
            for mapper in &mappers {
                let image = mapper.apply(mask) as usize;
                if orbit_of[image] == u32::MAX {
                    orbit_of[image] = id;
                    members += 1;
                }
            }
            reps.push(mask);
            sizes.push(members);
        }
        Ok(Self { n, reps, sizes, orbit_of })
    }

    /// Every subset in its own orbit.
    pub fn trivial(n: usize) -> Result<Self, SymmetryError> {
        Self::compute(&MotionGroup::trivial(n), n)
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[u64] {
        &self.reps
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    #[inline]
    pub fn orbit_of(&self, mask: SubsetMask) -> usize {
        self.orbit_of[mask.0 as usize] as usize
    }

    #[inline]
    pub(crate) fn orbit_of_raw(&self, mask: u64) -> u32 {
        self.orbit_of[mask as usize]
    }
}
