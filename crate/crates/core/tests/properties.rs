use mdentropy::lattice::{Adjacency, LatticeShape, SubsetMask};
use mdentropy::matchcount::{Kind, MatchingTable};
use mdentropy::spectral::{power_method_observed, spectral_radius, PowerOptions, WeightedOperator};
use mdentropy::symmetry::{MotionGroup, OrbitSpace};
use mdentropy::transfer::rigid_quotient;
use proptest::prelude::*;

fn small_shape() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (1usize..=10).prop_map(|m| vec![m]),
        (1usize..=4, 1usize..=3).prop_map(|(a, b)| vec![a, b]),
        (1usize..=2, 1usize..=2, 1usize..=3).prop_map(|(a, b, c)| vec![a, b, c]),
    ]
}

fn kind() -> impl Strategy<Value = Kind> {
    prop::sample::select(Kind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn point_index_round_trips(dims in small_shape(), seed in any::<usize>()) {
        let shape = LatticeShape::new(dims).unwrap();
        let index = seed % shape.points();
        let coords = shape.point_coords(index);
        prop_assert_eq!(shape.point_index(&coords).unwrap(), index);
    }

    #[test]
    fn torus_motions_preserve_entries(dims in small_shape(), kind in kind(), dimer_only in any::<bool>(),
                                      s in any::<u64>(), t in any::<u64>(), pick in any::<usize>()) {
        let shape = LatticeShape::new(dims).unwrap();
        let group = MotionGroup::rigid_motions(&shape);
        let g = &group.elements()[pick % group.order()];
        let table = MatchingTable::for_kind(&shape, kind, dimer_only).unwrap();
        let full = shape.full_mask().0;
        let (s, t) = (SubsetMask(s & full), SubsetMask(t & full));
        // translations along box axes are not symmetries of A, P or C
        let (adjacency, _) = kind.configuration(&shape);
        if g.preserves(&adjacency) && preserves_slots(g.images(), table.slots()) {
            prop_assert_eq!(table.entry(g.apply(s), g.apply(t)), table.entry(s, t));
        }
        if kind == Kind::B {
            prop_assert!(g.preserves(&Adjacency::build(&shape, Kind::B.adjacency_mode())));
            prop_assert_eq!(table.entry(g.apply(s), g.apply(t)), table.entry(s, t));
        }
    }

    #[test]
    fn orbit_map_is_invariant(dims in small_shape(), mask in any::<u64>(), pick in any::<usize>()) {
        let shape = LatticeShape::new(dims).unwrap();
        let group = MotionGroup::rigid_motions(&shape);
        let orbits = OrbitSpace::compute(&group, shape.points()).unwrap();
        let s = SubsetMask(mask & shape.full_mask().0);
        let g = &group.elements()[pick % group.order()];
        let alpha = orbits.orbit_of(s);
        prop_assert_eq!(orbits.orbit_of(g.apply(s)), alpha);
        prop_assert!(orbits.reps()[alpha] <= s.0);
        prop_assert_eq!(group.order() as u64 % orbits.sizes()[alpha], 0);
    }

    #[test]
    fn entries_are_symmetric_and_disjointness_gated(dims in small_shape(), kind in kind(), dimer_only in any::<bool>(),
                                                   s in any::<u64>(), t in any::<u64>()) {
        let shape = LatticeShape::new(dims).unwrap();
        let table = MatchingTable::for_kind(&shape, kind, dimer_only).unwrap();
        let full = shape.full_mask().0;
        let (s, t) = (SubsetMask(s & full), SubsetMask(t & full));
        prop_assert_eq!(table.entry(s, t), table.entry(t, s));
        if !s.is_disjoint(t) {
            prop_assert_eq!(table.entry(s, t), 0);
        }
    }
}

fn preserves_slots(images: &[usize], slots: &[u32]) -> bool {
    images.iter().enumerate().all(|(i, &j)| slots[i] == slots[j])
}

const SHAPES: &[&[usize]] = &[&[4], &[5], &[7], &[8], &[2, 2], &[3, 2], &[3, 3], &[4, 2]];

#[test]
fn shift_does_not_move_the_radius() {
    for &dims in SHAPES {
        for dimer_only in [false, true] {
            let shape = LatticeShape::new(dims.to_vec()).unwrap();
            let q = rigid_quotient(&shape, Kind::B, dimer_only).unwrap();
            let reference = spectral_radius(&q, &PowerOptions::default()).unwrap().bracket;
            for shift in [0.5, 2.0] {
                let options = PowerOptions { shift, ..PowerOptions::default() };
                let b = spectral_radius(&q, &options).unwrap().bracket;
                assert!(b.converged);
                let scale = reference.upper.max(1.0);
                assert!(
                    (b.rayleigh - reference.rayleigh).abs() <= 10.0 * options.tolerance * scale,
                    "{dims:?} dimer_only={dimer_only} shift={shift}: {} vs {}",
                    b.rayleigh,
                    reference.rayleigh
                );
                assert!(b.overlaps(&reference));
            }
        }
    }
}

#[test]
fn per_iteration_bounds_are_monotone_and_sandwich_the_radius() {
    for &dims in SHAPES {
        for dimer_only in [false, true] {
            let shape = LatticeShape::new(dims.to_vec()).unwrap();
            let q = rigid_quotient(&shape, Kind::B, dimer_only).unwrap();
            let options = PowerOptions::default();
            let rho = spectral_radius(&q, &options).unwrap().bracket.rayleigh + options.shift;
            let op = WeightedOperator::from_quotient(&q);
            let slack = 1e-12 * rho;
            let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
            power_method_observed(&op, &options, |iteration, b| {
                assert!(b.lower >= lower - slack, "{dims:?} lower fell at {iteration}");
                assert!(b.upper <= upper + slack, "{dims:?} upper rose at {iteration}");
                assert!(b.lower <= rho + slack && rho <= b.upper + slack, "{dims:?} sandwich at {iteration}");
                assert!(
                    b.lower <= b.rayleigh + slack && b.rayleigh <= b.upper + slack,
                    "{dims:?} rayleigh at {iteration}"
                );
                lower = b.lower;
                upper = b.upper;
            })
            .unwrap();
        }
    }
}

#[test]
fn eigenvector_residual_is_small() {
    for &dims in SHAPES {
        for dimer_only in [false, true] {
            let shape = LatticeShape::new(dims.to_vec()).unwrap();
            let q = rigid_quotient(&shape, Kind::B, dimer_only).unwrap();
            let options = PowerOptions::default();
            let result = spectral_radius(&q, &options).unwrap();
            let op = WeightedOperator::from_quotient(&q);
            let residual = op.relative_residual(&result.eigenvector, result.bracket.rayleigh);
            assert!(residual <= 100.0 * options.tolerance, "{dims:?} dimer_only={dimer_only}: residual {residual}");
        }
    }
}
