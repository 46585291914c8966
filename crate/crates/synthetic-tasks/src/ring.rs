//! Two-class ring dataset: points on an annulus around the unit
//! circle, labeled by the side of the vertical axis.

use rand::Rng;
use tensor_autodiff::rng::Prng;

pub const ORANGE: usize = 0;
pub const BLUE: usize = 1;

#[derive(Debug, Clone)]
pub struct RingDataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub r_min: f64,
    pub r_max: f64,
}

pub fn ring_label(p: &[f64]) -> usize {
    if p[0] > 0.0 {
        ORANGE
    } else {
        BLUE
    }
}

/// Four reference points: a diagonal orange/blue pair, the blue mirror
/// point, and a generic orange point used by the scaling example.
pub fn named_points() -> Vec<Vec<f64>> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let b = (-30.0f64).to_radians();
    vec![
        vec![a, a],
        vec![-a, -a],
        vec![-a, a],
        vec![b.cos(), b.sin()],
    ]
}

/// Samples n points with radius uniform in [1-noise, 1+noise] and
/// uniform angle, avoiding the decision boundary by a small margin so
/// labels are unambiguous. With `include_named` the four reference
/// points are prepended (and count toward n).
pub fn make_ring_dataset(n: usize, noise: f64, rng: &mut Prng, include_named: bool) -> RingDataset {
    assert!(n >= 4, "ring dataset needs at least 4 points");
    assert!((0.0..1.0).contains(&noise));
    let mut points = Vec::with_capacity(n);
    if include_named {
        points.extend(named_points());
    }
    while points.len() < n {
        let r = 1.0 - noise + 2.0 * noise * rng.gen::<f64>();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = vec![r * theta.cos(), r * theta.sin()];
        if p[0].abs() < 0.02 {
            continue;
        }
        points.push(p);
    }
    let labels = points.iter().map(|p| ring_label(p)).collect();
    RingDataset {
        points,
        labels,
        r_min: 1.0 - noise,
        r_max: 1.0 + noise,
    }
}

impl RingDataset {
    /// Exact membership predicate: on the annulus, with the analytic
    /// label rule.
    pub fn membership(&self, p: &[f64]) -> Option<usize> {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        (r >= self.r_min - 1e-12 && r <= self.r_max + 1e-12).then(|| ring_label(p))
    }
}
