//! Random valid instances for the bound-vs-oracle sweep: random
//! transitive pieces (coset actions of random subgroups) glued until
//! the carrier is full, with uniform random labels.

use group_core::{make_group, FiniteAction, Group, GroupKind};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::SymmetryInstance;

pub fn random_group(rng: &mut ChaCha8Rng) -> Group {
    let choices = [
        (GroupKind::Cyclic, 2usize),
        (GroupKind::Cyclic, 4),
        (GroupKind::Cyclic, 8),
        (GroupKind::Dihedral, 1),
        (GroupKind::Dihedral, 2),
        (GroupKind::Dihedral, 4),
    ];
    let (kind, n) = choices[rng.gen_range(0..choices.len())];
    make_group(kind, n).unwrap()
}

pub fn random_instance(seed: u64, max_carrier: usize, max_classes: usize) -> SymmetryInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = random_group(&mut rng);
    let subgroups = group.subgroups();
    let target = rng.gen_range(1..=max_carrier);
    let mut parts: Vec<FiniteAction> = Vec::new();
    let mut used = 0usize;
    while used < target {
        let sub = &subgroups[rng.gen_range(0..subgroups.len())];
        let orbit_len = group.order() / sub.len();
        if used + orbit_len > target {
            if parts.is_empty() {
                // at least one piece: take a fixed point
                let full: Vec<usize> = (0..group.order()).collect();
                parts.push(FiniteAction::coset_action(group.clone(), &full).unwrap());
                let _ = used;
            }
            break;
        }
        parts.push(FiniteAction::coset_action(group.clone(), sub).unwrap());
        used += orbit_len;
    }
    let action = FiniteAction::disjoint_union(&parts).unwrap();
    let m = rng.gen_range(1..=max_classes);
    let labels: Vec<usize> = (0..action.carrier_size())
        .map(|_| rng.gen_range(0..m))
        .collect();
    SymmetryInstance::uniform(action, labels, m).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_valid_and_sized() {
        for seed in 0..50 {
            let inst = random_instance(seed, 24, 4);
            assert!(inst.carrier_size() >= 1 && inst.carrier_size() <= 24);
            assert!(inst.num_classes >= 1 && inst.num_classes <= 4);
        }
    }
}
