//! Aggregation of run reports into a comparison table, with CSV/JSON
//! outputs, optional SVG learning curves, and declared-ordering checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::train::RunReport;
use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub n_train: usize,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingCheck {
    /// "lhs>rhs" on mean test accuracy at equal n_train.
    pub claim: String,
    pub n_train: usize,
    pub lhs_mean: f64,
    pub rhs_mean: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub rows: Vec<ComparisonRow>,
    pub orderings: Vec<OrderingCheck>,
    pub all_orderings_hold: bool,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups reports by (method, n_train). Rejects reports whose task
/// specs (corruption, sizes) disagree, since the comparison would be
/// meaningless.
pub fn compare(
    reports: &[RunReport],
    expectations: &[String],
) -> Result<ComparisonSummary, HarnessError> {
    if reports.len() < 2 {
        return Err(HarnessError::Config {
            reason: "compare needs at least two run reports".into(),
        });
    }
    let first = &reports[0].config.task;
    for r in reports {
        let t = &r.config.task;
        if t.corruption != first.corruption
            || t.render_px != first.render_px
            || t.crop_px != first.crop_px
        {
            return Err(HarnessError::Config {
                reason: "mismatched task specs across comparison runs".into(),
            });
        }
    }
    let mut groups: BTreeMap<(String, usize), Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        groups
            .entry((r.method.clone(), r.config.task.n_train))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    for ((method, n_train), rs) in &groups {
        let accuracies: Vec<f64> = rs
            .iter()
            .map(|r| r.test_accuracy.unwrap_or(f64::NAN))
            .collect();
        let (mean, stderr) = mean_stderr(&accuracies);
        rows.push(ComparisonRow {
            method: method.clone(),
            n_train: *n_train,
            seeds: rs.iter().map(|r| r.config.seed).collect(),
            accuracies,
            mean,
            stderr,
        });
    }
    let mut orderings = Vec::new();
    for claim in expectations {
        let Some((lhs, rhs)) = claim.split_once('>') else {
            return Err(HarnessError::Config {
                reason: format!("bad ordering claim {claim}; expected lhs>rhs"),
            });
        };
        let per_n: Vec<usize> = rows
            .iter()
            .filter(|r| r.method == lhs)
            .map(|r| r.n_train)
            .collect();
        for n in per_n {
            let lhs_mean = rows
                .iter()
                .find(|r| r.method == lhs && r.n_train == n)
                .map(|r| r.mean);
            let rhs_mean = rows
                .iter()
                .find(|r| r.method == rhs && r.n_train == n)
                .map(|r| r.mean);
            if let (Some(l), Some(r)) = (lhs_mean, rhs_mean) {
                orderings.push(OrderingCheck {
                    claim: claim.clone(),
                    n_train: n,
                    lhs_mean: l,
                    rhs_mean: r,
                    holds: l > r,
                });
            }
        }
    }
    let all_orderings_hold = orderings.iter().all(|o| o.holds);
    Ok(ComparisonSummary {
        rows,
        orderings,
        all_orderings_hold,
    })
}

pub fn write_csv(summary: &ComparisonSummary, path: &Path) -> Result<(), HarnessError> {
    let mut out = String::from("method,n_train,seeds,mean,stderr\n");
    for r in &summary.rows {
        let seeds = r
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            r.method, r.n_train, seeds, r.mean, r.stderr
        ));
    }
    fs::write(path, out).map_err(|e| HarnessError::Io(e.to_string()))
}

/// Minimal polyline SVG of validation accuracy per epoch, one line per
/// run, so comparisons are inspectable without external tooling.
pub fn write_learning_curves_svg(reports: &[RunReport], path: &Path) -> Result<(), HarnessError> {
    let (w, h, pad) = (640.0f64, 360.0f64, 36.0f64);
    let max_epochs = reports
        .iter()
        .map(|r| r.epochs.len())
        .max()
        .unwrap_or(1)
        .max(2) as f64;
    let palette = ["#2060c0", "#30a040", "#c03030", "#a060c0", "#c09020", "#208080"];
    let mut body = String::new();
    body.push_str(&format!(
        "<rect x='0' y='0' width='{w}' height='{h}' fill='white'/>\
         <line x1='{pad}' y1='{}' x2='{}' y2='{}' stroke='black'/>\
         <line x1='{pad}' y1='{pad}' x2='{pad}' y2='{}' stroke='black'/>",
        h - pad,
        w - pad,
        h - pad,
        h - pad
    ));
    let mut methods: Vec<String> = reports.iter().map(|r| r.method.clone()).collect();
    methods.sort();
    methods.dedup();
    for (ri, r) in reports.iter().enumerate() {
        let color = palette[methods.iter().position(|m| *m == r.method).unwrap_or(0)
            % palette.len()];
        let pts: Vec<String> = r
            .epochs
            .iter()
            .enumerate()
            .map(|(e, s)| {
                let x = pad + (w - 2.0 * pad) * e as f64 / (max_epochs - 1.0);
                let y = (h - pad) - (h - 2.0 * pad) * s.val_accuracy;
                format!("{x:.1},{y:.1}")
            })
            .collect();
        body.push_str(&format!(
            "<polyline fill='none' stroke='{color}' stroke-width='1.2' opacity='0.8' points='{}'><title>{} seed {}</title></polyline>",
            pts.join(" "),
            r.method,
            r.config.seed
        ));
        let _ = ri;
    }
    for (mi, m) in methods.iter().enumerate() {
        let y = pad + 14.0 * mi as f64;
        body.push_str(&format!(
            "<text x='{}' y='{y}' font-size='11' fill='{}'>{m}</text>",
            w - pad - 120.0,
            palette[mi % palette.len()]
        ));
    }
    let svg = format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{w}' height='{h}' viewBox='0 0 {w} {h}'>{body}</svg>"
    );
    fs::write(path, svg).map_err(|e| HarnessError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AugmentConfig, ExperimentConfig, ModelConfig, OptimConfig, TaskConfig};

    fn fake_report(method: &str, seed: u64, acc: f64, n_train: usize) -> RunReport {
        RunReport {
            config: ExperimentConfig {
                task: TaskConfig {
                    n_train,
                    ..TaskConfig::default()
                },
                model: ModelConfig::Plain { widths: [4, 4, 4, 4] },
                augment: AugmentConfig::default(),
                optim: OptimConfig::default(),
                seed,
                data_seed: None,
            },
            method: method.to_string(),
            param_count: 100,
            epochs: vec![],
            best_epoch: Some(0),
            best_val_accuracy: acc,
            test_accuracy: Some(acc),
            stopped_early: false,
            diverged: false,
        }
    }

    #[test]
    fn rows_aggregate_mean_and_stderr() {
        let reports = vec![
            fake_report("a", 0, 0.8, 100),
            fake_report("a", 1, 0.9, 100),
            fake_report("b", 0, 0.5, 100),
            fake_report("b", 1, 0.6, 100),
        ];
        let s = compare(&reports, &["a>b".to_string()]).unwrap();
        assert_eq!(s.rows.len(), 2);
        let a = s.rows.iter().find(|r| r.method == "a").unwrap();
        assert!((a.mean - 0.85).abs() < 1e-12);
        assert!((a.stderr - 0.05).abs() < 1e-9);
        assert!(s.all_orderings_hold);
    }

    #[test]
    fn mismatched_tasks_rejected() {
        let mut r2 = fake_report("b", 0, 0.5, 100);
        r2.config.task.corruption = synthetic_tasks::CorruptionKind::InvertLabel;
        let reports = vec![fake_report("a", 0, 0.8, 100), r2];
        assert!(compare(&reports, &[]).is_err());
    }

    #[test]
    fn failed_ordering_is_reported() {
        let reports = vec![
            fake_report("a", 0, 0.4, 100),
            fake_report("b", 0, 0.6, 100),
        ];
        let s = compare(&reports, &["a>b".to_string()]).unwrap();
        assert!(!s.all_orderings_hold);
    }
}
