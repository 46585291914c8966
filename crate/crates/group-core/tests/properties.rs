use group_core::{make_group, orbits, FiniteAction, GroupKind};
use proptest::prelude::*;

fn arb_group() -> impl Strategy<Value = (GroupKind, usize)> {
    prop_oneof![
        (1usize..=8).prop_map(|n| (GroupKind::Cyclic, n)),
        (1usize..=8).prop_map(|n| (GroupKind::Dihedral, n)),
    ]
}

proptest! {
    #[test]
    fn orbits_are_disjoint_and_cover((kind, n) in arb_group(), picks in prop::collection::vec(0usize..100, 1..5)) {
        let g = make_group(kind, n).unwrap();
        let subs = g.subgroups();
        let parts: Vec<FiniteAction> = picks
            .iter()
            .map(|&p| FiniteAction::coset_action(g.clone(), &subs[p % subs.len()]).unwrap())
            .collect();
        let action = FiniteAction::disjoint_union(&parts).unwrap();
        let orbs = orbits(&action);
        let mut seen = vec![false; action.carrier_size()];
        for orb in &orbs {
            for &x in orb {
                prop_assert!(!seen[x], "orbits overlap");
                seen[x] = true;
            }
        }
        prop_assert!(seen.into_iter().all(|s| s));
        // orbit of any member reproduces the same set
        for orb in &orbs {
            let again = group_core::orbit_stabilizer(&action, orb[orb.len() / 2]);
            prop_assert_eq!(&again.orbit, orb);
        }
    }

    #[test]
    fn orbit_stabilizer_product_is_group_order((kind, n) in arb_group(), pick in 0usize..100) {
        let g = make_group(kind, n).unwrap();
        let subs = g.subgroups();
        let action = FiniteAction::coset_action(g.clone(), &subs[pick % subs.len()]).unwrap();
        for x in 0..action.carrier_size() {
            let os = group_core::orbit_stabilizer(&action, x);
            prop_assert_eq!(os.orbit.len() * os.stabilizer.len(), g.order());
        }
    }
}
