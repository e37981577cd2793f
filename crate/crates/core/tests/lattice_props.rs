use ftsim_core::lattice::{BitSet, PauliChain, ToricLattice};
use proptest::prelude::*;

fn chain_strategy() -> impl Strategy<Value = (usize, Vec<bool>, Vec<bool>)> {
    (2usize..7).prop_flat_map(|k| {
        let n = 2 * k * k;
        (
            Just(k),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
        )
    })
}

fn chain(bits_x: &[bool], bits_z: &[bool]) -> PauliChain {
    let pick = |b: &[bool]| BitSet::from_indices(b.len(), b.iter().enumerate().filter(|p| *p.1).map(|p| p.0));
    PauliChain::from_parts(pick(bits_x), pick(bits_z))
}

proptest! {
    #[test]
    fn syndrome_is_linear((k, ax, az) in chain_strategy(), seed in any::<u64>()) {
        let l = ToricLattice::new(k).unwrap();
        let n = l.n_edges();
        // second chain derived from the seed so both share a length
        let bx: Vec<bool> = (0..n).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1).collect();
        let bz: Vec<bool> = (0..n).map(|i| (seed.rotate_right(i as u32 % 64) >> 3) & 1 == 1).collect();
        let a = chain(&ax, &az);
        let b = chain(&bx, &bz);
        let lhs = l.syndrome(&a.xor(&b)).unwrap();
        let rhs = l.syndrome(&a).unwrap().symmetric_difference(&l.syndrome(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn stabilizers_are_invisible((k, ax, az) in chain_strategy(), picks in proptest::collection::vec(any::<u16>(), 1..6)) {
        let l = ToricLattice::new(k).unwrap();
        let mut c = chain(&ax, &az);
        let before = (l.syndrome(&c).unwrap(), l.winding_parities(&c));
        for p in picks {
            let site = p as usize % (k * k);
            // plaquette boundaries are closed Z loops, stars are closed dual X loops
            c.z_part.xor_assign(&l.bound_set(site).unwrap());
            c.x_part.xor_assign(&l.star_set(site).unwrap());
        }
        prop_assert_eq!(before, (l.syndrome(&c).unwrap(), l.winding_parities(&c)));
    }

    #[test]
    fn defects_come_in_pairs((k, ax, az) in chain_strategy()) {
        let l = ToricLattice::new(k).unwrap();
        let d = l.syndrome(&chain(&ax, &az)).unwrap();
        prop_assert_eq!(d.vertex_defects.len() % 2, 0);
        prop_assert_eq!(d.face_defects.len() % 2, 0);
    }

    #[test]
    fn single_edge_flags_its_endpoints(k in 2usize..9, e in any::<usize>()) {
        let l = ToricLattice::new(k).unwrap();
        let e = e % l.n_edges();
        let z = PauliChain::z_only(BitSet::from_indices(l.n_edges(), [e]));
        let mut ends = l.edge_vertices(e).to_vec();
        ends.sort_unstable();
        prop_assert_eq!(l.syndrome(&z).unwrap().vertex_defects, ends);
        let x = PauliChain::x_only(BitSet::from_indices(l.n_edges(), [e]));
        let mut faces = l.edge_faces(e).to_vec();
        faces.sort_unstable();
        prop_assert_eq!(l.syndrome(&x).unwrap().face_defects, faces);
    }
}

#[test]
fn noncontractible_loops_carry_winding() {
    let l = ToricLattice::new(5).unwrap();
    // a straight horizontal row of Z edges wraps once
    let row: Vec<usize> = (0..5).collect();
    let straight = PauliChain::z_only(BitSet::from_indices(l.n_edges(), row));
    let h = l.homology_class(&straight).unwrap();
    assert_eq!(h.bits().iter().filter(|b| **b).count(), 1);
    // the same loop shifted up two rows differs by a boundary
    let shifted = PauliChain::z_only(BitSet::from_indices(l.n_edges(), (10..15).collect::<Vec<_>>()));
    assert_eq!(l.homology_class(&shifted).unwrap(), h);
    assert!(l.homology_class(&straight.xor(&shifted)).unwrap().is_trivial());
}
