//! Scenes: three colored oriented triangle markers in a planar
//! workspace.

use rand::Rng;
use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerColor {
    Yellow,
    Orange,
    Green,
}

impl MarkerColor {
    pub fn rgb(self) -> [f64; 3] {
        match self {
            MarkerColor::Yellow => [1.0, 0.9, 0.15],
            MarkerColor::Orange => [1.0, 0.45, 0.1],
            MarkerColor::Green => [0.15, 0.9, 0.2],
        }
    }

    /// Height above the workspace plane in meters; also painted into
    /// the fourth image channel.
    pub fn height(self) -> f64 {
        match self {
            MarkerColor::Yellow => 0.030,
            MarkerColor::Orange => 0.020,
            MarkerColor::Green => 0.010,
        }
    }
}

pub const MARKER_ORDER: [MarkerColor; 3] =
    [MarkerColor::Yellow, MarkerColor::Orange, MarkerColor::Green];

/// A marker stores its position and orientation as a unit vector so
/// that quarter-turn scene rotations stay exact in f64.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Marker {
    pub color: MarkerColor,
    pub pos: [f64; 2],
    pub dir: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    pub markers: [Marker; 3],
}

/// Isoceles triangle shape in marker-local coordinates: apex forward.
pub const APEX_LEN: f64 = 0.026;
pub const BASE_BACK: f64 = 0.013;
pub const BASE_HALF: f64 = 0.013;

/// Workspace geometry defaults.
pub const WORLD_HALF: f64 = 0.15;
pub const RADIUS_MIN: f64 = 0.045;
pub const RADIUS_MAX: f64 = 0.075;
pub const MIN_SEPARATION: f64 = 0.055;

impl Marker {
    /// World-space triangle vertices: apex, then the two base corners.
    pub fn vertices(&self) -> [[f64; 2]; 3] {
        let [c, s] = self.dir;
        let rot = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let apex = rot([APEX_LEN, 0.0]);
        let b1 = rot([-BASE_BACK, BASE_HALF]);
        let b2 = rot([-BASE_BACK, -BASE_HALF]);
        [
            [self.pos[0] + apex[0], self.pos[1] + apex[1]],
            [self.pos[0] + b1[0], self.pos[1] + b1[1]],
            [self.pos[0] + b2[0], self.pos[1] + b2[1]],
        ]
    }
}

impl Scene {
    pub fn marker(&self, color: MarkerColor) -> &Marker {
        self.markers.iter().find(|m| m.color == color).unwrap()
    }

    /// Rotates positions and orientation vectors about the workspace
    /// center by the rotation with the given cosine/sine. With exact
    /// quarter-turn entries the result is bit-exact.
    pub fn rotated(&self, c: f64, s: f64) -> Scene {
        let rot = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        Scene {
            markers: self.markers.map(|m| Marker {
                color: m.color,
                pos: rot(m.pos),
                dir: rot(m.dir),
            }),
        }
    }

    /// True when the yellow marker lies left of the orange marker in
    /// the world frame.
    pub fn yellow_left_of_orange(&self) -> bool {
        self.marker(MarkerColor::Yellow).pos[0] < self.marker(MarkerColor::Orange).pos[0]
    }
}

/// Samples marker positions on the annulus with a minimum pairwise
/// separation and uniform orientations. The radius/angle law is
/// rotation invariant, so the scene distribution is symmetric under
/// any rotation about the center.
pub fn sample_scene(rng: &mut Prng) -> Scene {
    loop {
        let mut positions: Vec<[f64; 2]> = Vec::with_capacity(3);
        let mut tries = 0;
        while positions.len() < 3 && tries < 200 {
            tries += 1;
            let r = RADIUS_MIN + (RADIUS_MAX - RADIUS_MIN) * rng.gen::<f64>();
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            let p = [r * theta.cos(), r * theta.sin()];
            if positions
                .iter()
                .all(|q| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt() >= MIN_SEPARATION)
            {
                positions.push(p);
            }
        }
        if positions.len() < 3 {
            continue;
        }
        let markers: Vec<Marker> = MARKER_ORDER
            .iter()
            .zip(&positions)
            .map(|(&color, &pos)| {
                let phi = rng.gen::<f64>() * std::f64::consts::TAU;
                Marker {
                    color,
                    pos,
                    dir: [phi.cos(), phi.sin()],
                }
            })
            .collect();
        let scene = Scene {
            markers: [markers[0], markers[1], markers[2]],
        };
        // degenerate inversion predicate (exactly tied x) is resampled
        let dx = scene.marker(MarkerColor::Yellow).pos[0]
            - scene.marker(MarkerColor::Orange).pos[0];
        if dx.abs() > 1e-6 {
            return scene;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tensor_autodiff::rng::seeded;

    #[test]
    fn sampled_scenes_respect_geometry() {
        let mut rng = seeded(1);
        for _ in 0..50 {
            let s = sample_scene(&mut rng);
            for m in &s.markers {
                let r = (m.pos[0].powi(2) + m.pos[1].powi(2)).sqrt();
                assert!(r >= RADIUS_MIN - 1e-12 && r <= RADIUS_MAX + 1e-12);
                let n = (m.dir[0].powi(2) + m.dir[1].powi(2)).sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    let (a, b) = (s.markers[i].pos, s.markers[j].pos);
                    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                    assert!(d >= MIN_SEPARATION - 1e-12);
                }
            }
        }
    }

    #[test]
    fn quarter_turn_rotation_is_exact() {
        let mut rng = seeded(2);
        let s = sample_scene(&mut rng);
        let r90 = s.rotated(0.0, 1.0);
        let r180 = r90.rotated(0.0, 1.0);
        let direct = s.rotated(-1.0, 0.0);
        for (a, b) in r180.markers.iter().zip(&direct.markers) {
            assert_eq!(a.pos, b.pos);
            assert_eq!(a.dir, b.dir);
        }
    }
}
