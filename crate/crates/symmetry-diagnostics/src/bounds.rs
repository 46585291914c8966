//! Accuracy upper bounds for invariance-constrained models.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::instance::{consensus_analysis, ConsensusReport, SymmetryInstance};

/// Result of the tight bound: the exact value, its f64 projection, and
/// the bound-achieving invariant labeling (majority label per orbit,
/// broadcast to every carrier point).
#[derive(Debug, Clone)]
pub struct TightBound {
    pub exact: BigRational,
    pub value: f64,
    pub achieving_labels: Vec<usize>,
    pub report: ConsensusReport,
}

/// Tight bound: sum over consensus proportions p of c_p * p. An
/// invariant model is constant on every orbit, so per orbit it can be
/// right on at most the majority-label fraction of points.
pub fn tight_bound(instance: &SymmetryInstance) -> TightBound {
    let report = consensus_analysis(instance);
    let mut exact = BigRational::zero();
    for (p, w) in &report.c_p {
        let p_big = BigRational::new((*p.numer()).into(), (*p.denom()).into());
        exact += p_big * w.clone();
    }
    let mut achieving_labels = vec![0usize; instance.carrier_size()];
    for orbit in &report.orbit_reports {
        for &x in &orbit.members {
            achieving_labels[x] = orbit.majority_label;
        }
    }
    let value = exact.to_f64().expect("bound fits in f64");
    TightBound {
        exact,
        value,
        achieving_labels,
        report,
    }
}

/// Loose bound: 1 - sum_k c_k (k-1)/|G|, from counting how many points
/// an orbit with k distinct labels must get wrong in the best case of a
/// free orbit with maximally unequal labels.
pub fn loose_bound(instance: &SymmetryInstance) -> (BigRational, f64) {
    let report = consensus_analysis(instance);
    let order = instance.action.group().order();
    let mut penalty = BigRational::zero();
    for (k, w) in &report.c_k {
        let frac = BigRational::new(((*k as i64) - 1).into(), (order as i64).into());
        penalty += frac * w.clone();
    }
    let exact = BigRational::one() - penalty;
    let value = exact.to_f64().expect("bound fits in f64");
    (exact, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SymmetryInstance;
    use group_core::{make_group, FiniteAction, GroupKind};

    #[test]
    fn all_single_label_orbits_bound_is_one() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let action = FiniteAction::left_translation(g);
        let inst = SymmetryInstance::uniform(action, vec![2, 2, 2, 2], 3).unwrap();
        assert_eq!(tight_bound(&inst).value, 1.0);
        assert_eq!(loose_bound(&inst).1, 1.0);
    }

    #[test]
    fn achieving_labeling_is_invariant_and_majority() {
        let g = make_group(GroupKind::Cyclic, 2).unwrap();
        let action =
            FiniteAction::from_table(g, vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        let inst = SymmetryInstance::uniform(action.clone(), vec![0, 0, 0, 1], 2).unwrap();
        let tb = tight_bound(&inst);
        // orbit {0,1} all label 0; orbit {2,3} split evenly, and the
        // deterministic tie-break picks the highest class index
        assert_eq!(tb.achieving_labels, vec![0, 0, 1, 1]);
        for g_idx in 0..2 {
            for x in 0..4 {
                assert_eq!(
                    tb.achieving_labels[action.apply_idx(g_idx, x)],
                    tb.achieving_labels[x]
                );
            }
        }
    }

    #[test]
    fn bounds_invariant_under_label_and_carrier_permutation() {
        let g = make_group(GroupKind::Dihedral, 2).unwrap();
        let action = FiniteAction::left_translation(g.clone());
        let labels = vec![0, 1, 1, 2];
        let inst = SymmetryInstance::uniform(action, labels.clone(), 3).unwrap();
        let t0 = tight_bound(&inst).exact;
        let l0 = loose_bound(&inst).0;
        // relabel classes 0<->2
        let relabeled: Vec<usize> = labels.iter().map(|&l| [2, 1, 0][l]).collect();
        let action2 = FiniteAction::left_translation(g.clone());
        let inst2 = SymmetryInstance::uniform(action2, relabeled, 3).unwrap();
        assert_eq!(tight_bound(&inst2).exact, t0);
        assert_eq!(loose_bound(&inst2).0, l0);
        // rename carrier points by p: new_table[g][p(x)] = p(old[g][x])
        let base = FiniteAction::left_translation(g.clone());
        let p = [2usize, 3, 0, 1];
        let mut table = vec![vec![0usize; 4]; 4];
        let mut labels3 = vec![0usize; 4];
        for x in 0..4 {
            labels3[p[x]] = labels[x];
            for gi in 0..4 {
                table[gi][p[x]] = p[base.apply_idx(gi, x)];
            }
        }
        let action3 = FiniteAction::from_table(g, table).unwrap();
        let inst3 = SymmetryInstance::uniform(action3, labels3, 3).unwrap();
        assert_eq!(tight_bound(&inst3).exact, t0);
        assert_eq!(loose_bound(&inst3).0, l0);
    }
}
