//! Labeled finite classification problems with a group action.

use std::collections::BTreeMap;

use group_core::{orbits, FiniteAction, GroupSpec};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::DiagError;

/// A finite labeled set carrying a group action. Weights are optional
/// (uniform when omitted) and are carried as exact rationals internally
/// so the two bound routes can be compared with zero tolerance.
#[derive(Debug, Clone)]
pub struct SymmetryInstance {
    pub action: FiniteAction,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    /// Exact per-point weights summing to one.
    weights: Vec<BigRational>,
    /// Whether the weights were equal along every orbit (within 1e-9 of
    /// the raw f64 inputs). The bounds assume a density-preserving
    /// action; when this is false the reports carry a warning.
    density_preserving: bool,
}

impl SymmetryInstance {
    pub fn new(
        action: FiniteAction,
        labels: Vec<usize>,
        num_classes: usize,
        raw_weights: Option<Vec<f64>>,
    ) -> Result<Self, DiagError> {
        let n = action.carrier_size();
        if labels.len() != n {
            return Err(DiagError::Invalid {
                reason: "labels length must match carrier size".into(),
            });
        }
        if num_classes == 0 || labels.iter().any(|&l| l >= num_classes) {
            return Err(DiagError::Invalid {
                reason: "labels must lie in [0, num_classes)".into(),
            });
        }
        let weights = match &raw_weights {
            None => {
                let w = BigRational::new(BigInt::one(), BigInt::from(n));
                vec![w; n]
            }
            Some(ws) => {
                if ws.len() != n {
                    return Err(DiagError::Invalid {
                        reason: "weights length must match carrier size".into(),
                    });
                }
                if ws.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
                    return Err(DiagError::Invalid {
                        reason: "weights must be nonnegative and finite".into(),
                    });
                }
                let total: f64 = ws.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(DiagError::Invalid {
                        reason: format!("weights must sum to 1, got {total}"),
                    });
                }
                // every f64 is an exact dyadic rational; renormalize
                // exactly so the total is exactly one
                let exact: Vec<BigRational> = ws
                    .iter()
                    .map(|&w| BigRational::from_float(w).unwrap())
                    .collect();
                let sum: BigRational = exact.iter().fold(BigRational::zero(), |a, b| a + b);
                exact.into_iter().map(|w| w / sum.clone()).collect()
            }
        };
        let density_preserving = match &raw_weights {
            None => true,
            Some(ws) => orbits(&action).iter().all(|orbit| {
                orbit
                    .iter()
                    .all(|&x| (ws[x] - ws[orbit[0]]).abs() <= 1e-9)
            }),
        };
        Ok(SymmetryInstance {
            action,
            labels,
            num_classes,
            weights,
            density_preserving,
        })
    }

    pub fn uniform(
        action: FiniteAction,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self, DiagError> {
        Self::new(action, labels, num_classes, None)
    }

    pub fn carrier_size(&self) -> usize {
        self.action.carrier_size()
    }

    pub fn weight(&self, x: usize) -> &BigRational {
        &self.weights[x]
    }

    pub fn density_preserving(&self) -> bool {
        self.density_preserving
    }
}

/// Per-orbit label statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport {
    pub members: Vec<usize>,
    /// Number of distinct true labels on the orbit.
    pub distinct_labels: usize,
    /// Consensus proportion: count of the majority label over orbit size.
    pub consensus: Ratio<i64>,
    pub majority_label: usize,
    /// Exact total weight of the orbit.
    pub weight: BigRational,
}

/// Consensus statistics: c_p maps each consensus proportion to the
/// weight fraction of points carrying it; c_k does the same for the
/// distinct-label count.
#[derive(Debug, Clone)]
pub struct ConsensusReport {
    pub orbit_reports: Vec<OrbitReport>,
    pub c_p: BTreeMap<Ratio<i64>, BigRational>,
    pub c_k: BTreeMap<usize, BigRational>,
    pub density_preserving: bool,
}

pub fn consensus_analysis(instance: &SymmetryInstance) -> ConsensusReport {
    let orbit_sets = orbits(&instance.action);
    let mut orbit_reports = Vec::with_capacity(orbit_sets.len());
    let mut c_p: BTreeMap<Ratio<i64>, BigRational> = BTreeMap::new();
    let mut c_k: BTreeMap<usize, BigRational> = BTreeMap::new();
    for members in orbit_sets {
        let mut counts = vec![0usize; instance.num_classes];
        let mut weight = BigRational::zero();
        for &x in &members {
            counts[instance.labels[x]] += 1;
            weight += instance.weight(x).clone();
        }
        let (majority_label, &max_count) = counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .expect("non-empty class set");
        let distinct_labels = counts.iter().filter(|&&c| c > 0).count();
        let consensus = Ratio::new(max_count as i64, members.len() as i64);
        *c_p.entry(consensus).or_insert_with(BigRational::zero) += weight.clone();
        *c_k.entry(distinct_labels).or_insert_with(BigRational::zero) += weight.clone();
        orbit_reports.push(OrbitReport {
            members,
            distinct_labels,
            consensus,
            majority_label,
            weight,
        });
    }
    ConsensusReport {
        orbit_reports,
        c_p,
        c_k,
        density_preserving: instance.density_preserving,
    }
}

/// Serializable instance file format: group spec, permutation table,
/// labels, optional weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub group: GroupSpec,
    pub table: Vec<Vec<usize>>,
    pub labels: Vec<usize>,
    #[serde(default)]
    pub num_classes: Option<usize>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<SymmetryInstance, DiagError> {
        let group = self.group.build().map_err(DiagError::Group)?;
        let action =
            FiniteAction::from_table(group, self.table.clone()).map_err(DiagError::Group)?;
        let m = self
            .num_classes
            .unwrap_or_else(|| self.labels.iter().copied().max().map_or(1, |v| v + 1));
        SymmetryInstance::new(action, self.labels.clone(), m, self.weights.clone())
    }
}
