//! The `bound` and `diagnose` operations: file in, JSON report out.

use std::path::Path;

use group_core::{make_group, rep_matrix, GroupKind, RepKind};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use symmetry_diagnostics::{
    classify_action, loose_bound, tight_bound, EquivarianceVerdict, InstanceSpec,
    NearestNeighborOracle, PredicateOracle,
};
use synthetic_tasks::{CoRotatedPair, PairGeneratorOracle};

use crate::HarnessError;

/// Byte-stable bound report; map keys are exact fraction strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub carrier_size: usize,
    pub group: group_core::GroupSpec,
    pub c_p: std::collections::BTreeMap<String, f64>,
    pub c_k: std::collections::BTreeMap<String, f64>,
    pub tight_bound: f64,
    pub tight_bound_fraction: String,
    pub loose_bound: f64,
    pub density_preserving: bool,
    pub orbits: Vec<OrbitRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitRow {
    pub members: Vec<usize>,
    pub distinct_labels: usize,
    pub consensus: String,
    pub majority_label: usize,
}

pub fn bound_report(spec: &InstanceSpec) -> Result<BoundReport, HarnessError> {
    let instance = spec.build().map_err(HarnessError::Diag)?;
    let tb = tight_bound(&instance);
    let (_, loose) = loose_bound(&instance);
    let c_p = tb
        .report
        .c_p
        .iter()
        .map(|(p, w)| (format!("{}/{}", p.numer(), p.denom()), w.to_f64().unwrap()))
        .collect();
    let c_k = tb
        .report
        .c_k
        .iter()
        .map(|(k, w)| (k.to_string(), w.to_f64().unwrap()))
        .collect();
    let orbits = tb
        .report
        .orbit_reports
        .iter()
        .map(|o| OrbitRow {
            members: o.members.clone(),
            distinct_labels: o.distinct_labels,
            consensus: format!("{}/{}", o.consensus.numer(), o.consensus.denom()),
            majority_label: o.majority_label,
        })
        .collect();
    Ok(BoundReport {
        carrier_size: instance.carrier_size(),
        group: spec.group.clone(),
        c_p,
        c_k,
        tight_bound: tb.value,
        tight_bound_fraction: format!("{}", tb.exact),
        loose_bound: loose,
        density_preserving: instance.density_preserving(),
        orbits,
    })
}

/// Point-cloud dataset file for `diagnose`: 2D points with labels and
/// an optional annulus membership band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointDatasetFile {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    #[serde(default)]
    pub annulus: Option<[f64; 2]>,
}

/// Action specification strings accepted by `diagnose`:
/// - "reflect-horizontal": D1 acting by reflection across the x axis
/// - "rot-pi": the half-turn rotation group
/// - "scale:F": two-element check whose non-identity element scales by F
/// - "c8-image": C8 image rotations on a generated pair dataset
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionSpecKind {
    ReflectHorizontal,
    RotPi,
    Scale(f64),
    C8Image,
}

pub fn parse_action_spec(s: &str) -> Result<ActionSpecKind, HarnessError> {
    if s == "reflect-horizontal" {
        return Ok(ActionSpecKind::ReflectHorizontal);
    }
    if s == "rot-pi" {
        return Ok(ActionSpecKind::RotPi);
    }
    if s == "c8-image" {
        return Ok(ActionSpecKind::C8Image);
    }
    if let Some(f) = s.strip_prefix("scale:") {
        let factor: f64 = f.parse().map_err(|_| HarnessError::Config {
            reason: format!("bad scale factor {f}"),
        })?;
        return Ok(ActionSpecKind::Scale(factor));
    }
    Err(HarnessError::Config {
        reason: format!("unknown action spec {s}"),
    })
}

pub fn diagnose_points(
    ds: &PointDatasetFile,
    action: ActionSpecKind,
    tol: f64,
) -> Result<EquivarianceVerdict, HarnessError> {
    let run = |group: group_core::Group,
               transform: &dyn Fn(group_core::GroupElement, &Vec<f64>) -> Vec<f64>|
     -> Result<EquivarianceVerdict, HarnessError> {
        let verdict = if let Some([r0, r1]) = ds.annulus {
            let oracle = PredicateOracle {
                predicate: move |p: &Vec<f64>| {
                    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    (r >= r0 - 1e-12 && r <= r1 + 1e-12)
                        .then(|| synthetic_tasks::ring_label(p))
                },
            };
            classify_action(&ds.points, &ds.labels, &group, transform, |_, l| l, &oracle, 8)
        } else {
            let oracle = NearestNeighborOracle {
                points: &ds.points,
                labels: &ds.labels,
                tol,
            };
            classify_action(&ds.points, &ds.labels, &group, transform, |_, l| l, &oracle, 8)
        };
        verdict.map_err(HarnessError::Diag)
    };
    match action {
        ActionSpecKind::ReflectHorizontal => {
            let g = make_group(GroupKind::Dihedral, 1).unwrap();
            let gc = g.clone();
            run(g, &move |e, p| {
                rep_matrix(&gc, RepKind::Standard2d, e).apply(p)
            })
        }
        ActionSpecKind::RotPi => {
            let g = make_group(GroupKind::Cyclic, 2).unwrap();
            let gc = g.clone();
            run(g, &move |e, p| {
                rep_matrix(&gc, RepKind::Standard2d, e).apply(p)
            })
        }
        ActionSpecKind::Scale(factor) => {
            let g = make_group(GroupKind::Cyclic, 2).unwrap();
            run(g, &move |e, p| {
                if e.index == 0 {
                    p.clone()
                } else {
                    vec![factor * p[0], factor * p[1]]
                }
            })
        }
        ActionSpecKind::C8Image => Err(HarnessError::Config {
            reason: "c8-image applies to pair datasets, not point files".into(),
        }),
    }
}

/// Diagnoses a generated pair dataset (directory + stem) under the C8
/// image action using the generator's own membership oracle.
pub fn diagnose_pairs(dir: &Path, stem: &str) -> Result<EquivarianceVerdict, HarnessError> {
    let set = synthetic_tasks::load_pairs(dir, stem)?;
    if set.samples.is_empty() {
        return Err(HarnessError::Config {
            reason: "empty dataset".into(),
        });
    }
    let c8 = make_group(GroupKind::Cyclic, 8).unwrap();
    let samples: Vec<CoRotatedPair> = set
        .samples
        .iter()
        .map(CoRotatedPair::from_pair)
        .collect();
    let labels: Vec<usize> = set.samples.iter().map(|s| s.label).collect();
    let oracle = PairGeneratorOracle {
        corruption: set.config.corruption,
    };
    classify_action(
        &samples,
        &labels,
        &c8,
        |g, s| s.rotate(g.rotation_steps),
        |_, l| l,
        &oracle,
        8,
    )
    .map_err(HarnessError::Diag)
}

pub fn verdict_to_json(v: &EquivarianceVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}
