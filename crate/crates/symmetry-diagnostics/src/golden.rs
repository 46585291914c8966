//! Two reference instances with known exact bounds.

use group_core::{make_group, FiniteAction, GroupKind};

use crate::instance::SymmetryInstance;

/// The rotation-estimation task under label inversion, abstracted to
/// its orbit structure. Points are pairs (true rotation class g, scene
/// orientation octant k); co-rotating the scene pair advances k and
/// leaves g fixed. The label is g, inverted to -g on the half of the
/// orientations where the inversion predicate fires. Orbits with
/// g in {0, 4} (self-inverse classes) are single-labeled; the other six
/// classes split 4/4, so c_1 = 1/4, c_{1/2} = 3/4 and the tight bound
/// is 0.625.
pub fn label_inversion_instance() -> SymmetryInstance {
    let group = make_group(GroupKind::Cyclic, 8).unwrap();
    let idx = |g: usize, k: usize| g * 8 + k;
    let mut table = vec![vec![0usize; 64]; 8];
    for (j, row) in table.iter_mut().enumerate() {
        for g in 0..8 {
            for k in 0..8 {
                row[idx(g, k)] = idx(g, (k + j) % 8);
            }
        }
    }
    let mut labels = vec![0usize; 64];
    for g in 0..8 {
        for k in 0..8 {
            labels[idx(g, k)] = if k < 4 { g } else { (8 - g) % 8 };
        }
    }
    let action = FiniteAction::from_table(group, table).unwrap();
    SymmetryInstance::uniform(action, labels, 8).unwrap()
}

/// Two-class ring under rotation by pi: eight points on the unit
/// circle at angles 22.5 + 45 k degrees, labeled by the sign of x.
/// Every orbit pairs antipodal points with opposite labels, so
/// c_{1/2} = 1 and both bounds equal 0.5.
pub fn antipodal_ring_instance() -> SymmetryInstance {
    let group = make_group(GroupKind::Cyclic, 2).unwrap();
    let table = vec![
        (0..8).collect::<Vec<usize>>(),
        (0..8).map(|i| (i + 4) % 8).collect(),
    ];
    let labels: Vec<usize> = (0..8)
        .map(|i| {
            let theta = (22.5 + 45.0 * i as f64).to_radians();
            if theta.cos() > 0.0 {
                0
            } else {
                1
            }
        })
        .collect();
    let action = FiniteAction::from_table(group, table).unwrap();
    SymmetryInstance::uniform(action, labels, 2).unwrap()
}
