//! Per-sample classification of a model symmetry as correct, incorrect,
//! or extrinsic with respect to a dataset.

use group_core::{Group, GroupElement};
use serde::{Deserialize, Serialize};

use crate::DiagError;

/// Decides whether a transformed point is in-distribution and, if so,
/// what its true label is. Synthetic generators expose exact oracles;
/// arbitrary datasets fall back to a nearest-neighbor test.
pub trait MembershipOracle<S> {
    fn lookup(&self, point: &S) -> Option<usize>;
}

/// Nearest-neighbor membership: in-distribution iff some dataset point
/// lies within `tol` (Euclidean); the label of the nearest point is the
/// true label. `tol` is a required explicit argument; there is no
/// meaningful silent default for a decision rule.
pub struct NearestNeighborOracle<'a> {
    pub points: &'a [Vec<f64>],
    pub labels: &'a [usize],
    pub tol: f64,
}

impl MembershipOracle<Vec<f64>> for NearestNeighborOracle<'_> {
    fn lookup(&self, point: &Vec<f64>) -> Option<usize> {
        let mut best = f64::INFINITY;
        let mut best_label = 0usize;
        for (p, &l) in self.points.iter().zip(self.labels) {
            let d2: f64 = p
                .iter()
                .zip(point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 < best {
                best = d2;
                best_label = l;
            }
        }
        (best.sqrt() <= self.tol).then_some(best_label)
    }
}

/// Membership backed by an exact predicate with an exact label rule.
pub struct PredicateOracle<F> {
    pub predicate: F,
}

impl<S, F: Fn(&S) -> Option<usize>> MembershipOracle<S> for PredicateOracle<F> {
    fn lookup(&self, point: &S) -> Option<usize> {
        (self.predicate)(point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Correct,
    Incorrect,
    Extrinsic,
    Mixed,
}

/// A witness records (sample index, group element index).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivarianceVerdict {
    pub overall: VerdictKind,
    /// In-distribution transforms whose labels agree.
    pub correct_count: usize,
    /// In-distribution transforms whose labels disagree.
    pub incorrect_count: usize,
    /// Transforms that leave the distribution.
    pub extrinsic_count: usize,
    pub correct_witnesses: Vec<(usize, usize)>,
    pub incorrect_witnesses: Vec<(usize, usize)>,
    pub extrinsic_witnesses: Vec<(usize, usize)>,
}

impl EquivarianceVerdict {
    pub fn total(&self) -> usize {
        self.correct_count + self.incorrect_count + self.extrinsic_count
    }
}

/// Tallies every (sample, non-identity element) pair. The verdict
/// precedence reflects the asymmetry of the accuracy bound: a single
/// incorrect witness caps the model, so Incorrect dominates, then Mixed,
/// then Extrinsic (all transforms leave the distribution), then Correct.
pub fn classify_action<S>(
    samples: &[S],
    labels: &[usize],
    group: &Group,
    transform: impl Fn(GroupElement, &S) -> S,
    label_action: impl Fn(GroupElement, usize) -> usize,
    membership: &dyn MembershipOracle<S>,
    max_witnesses: usize,
) -> Result<EquivarianceVerdict, DiagError> {
    if samples.is_empty() {
        return Err(DiagError::Invalid {
            reason: "empty dataset".into(),
        });
    }
    if samples.len() != labels.len() {
        return Err(DiagError::Invalid {
            reason: "labels length must match samples".into(),
        });
    }
    let mut verdict = EquivarianceVerdict {
        overall: VerdictKind::Correct,
        correct_count: 0,
        incorrect_count: 0,
        extrinsic_count: 0,
        correct_witnesses: Vec::new(),
        incorrect_witnesses: Vec::new(),
        extrinsic_witnesses: Vec::new(),
    };
    for (si, sample) in samples.iter().enumerate() {
        for g in group.elements().iter().skip(1) {
            let moved = transform(*g, sample);
            match membership.lookup(&moved) {
                None => {
                    verdict.extrinsic_count += 1;
                    if verdict.extrinsic_witnesses.len() < max_witnesses {
                        verdict.extrinsic_witnesses.push((si, g.index));
                    }
                }
                Some(true_label) => {
                    let expected = label_action(*g, labels[si]);
                    if true_label == expected {
                        verdict.correct_count += 1;
                        if verdict.correct_witnesses.len() < max_witnesses {
                            verdict.correct_witnesses.push((si, g.index));
                        }
                    } else {
                        verdict.incorrect_count += 1;
                        if verdict.incorrect_witnesses.len() < max_witnesses {
                            verdict.incorrect_witnesses.push((si, g.index));
                        }
                    }
                }
            }
        }
    }
    let total = verdict.total();
    verdict.overall = if verdict.incorrect_count > 0 {
        VerdictKind::Incorrect
    } else if verdict.extrinsic_count == total && total > 0 {
        VerdictKind::Extrinsic
    } else if verdict.correct_count == total {
        // includes the identity-only group, where total = 0
        VerdictKind::Correct
    } else {
        VerdictKind::Mixed
    };
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use group_core::{make_group, GroupKind};

    #[test]
    fn identity_only_group_is_correct() {
        let g = make_group(GroupKind::Cyclic, 1).unwrap();
        let samples = vec![vec![1.0, 0.0]];
        let labels = vec![0];
        let oracle = NearestNeighborOracle {
            points: &samples,
            labels: &labels,
            tol: 0.1,
        };
        let v = classify_action(
            &samples,
            &labels,
            &g,
            |_, s| s.clone(),
            |_, l| l,
            &oracle,
            4,
        )
        .unwrap();
        assert_eq!(v.overall, VerdictKind::Correct);
        assert_eq!(v.total(), 0);
    }

    #[test]
    fn empty_dataset_rejected() {
        let g = make_group(GroupKind::Cyclic, 2).unwrap();
        let samples: Vec<Vec<f64>> = vec![];
        let labels = vec![];
        let oracle = NearestNeighborOracle {
            points: &samples,
            labels: &labels,
            tol: 0.1,
        };
        assert!(classify_action(
            &samples,
            &labels,
            &g,
            |_, s: &Vec<f64>| s.clone(),
            |_, l| l,
            &oracle,
            4
        )
        .is_err());
    }

    #[test]
    fn tallies_cover_every_pair() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let samples = vec![vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![0, 0, 0];
        let oracle = PredicateOracle {
            predicate: |_: &Vec<f64>| None,
        };
        let v = classify_action(
            &samples,
            &labels,
            &g,
            |_, s| s.clone(),
            |_, l| l,
            &oracle,
            2,
        )
        .unwrap();
        assert_eq!(v.overall, VerdictKind::Extrinsic);
        assert_eq!(v.total(), 3 * (4 - 1));
        assert_eq!(v.extrinsic_witnesses.len(), 2);
    }
}
